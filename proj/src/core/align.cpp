#include "lexiphylo/align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "lexiphylo/csv.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"

namespace lexiphylo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Gotoh DP over three states. match: column (x_i, y_j); gap_y: column
// (x_i, -); gap_x: column (-, y_j). gap_x <-> gap_y transitions are absent,
// which is exactly the licit-alignment restriction.
struct GotohTables {
    std::size_t cols = 0;
    std::vector<double> match, gap_y, gap_x;

    void reset(std::size_t rows, std::size_t c) {
        cols = c;
        match.assign(rows * c, kNegInf);
        gap_y.assign(rows * c, kNegInf);
        gap_x.assign(rows * c, kNegInf);
    }
    std::size_t at(std::size_t i, std::size_t j) const { return i * cols + j; }
};

enum State : int { kMatch = 0, kGapX = 1, kGapY = 2 };

GotohTables& fill(const Form& x, const Form& y, const PmiModel& model) {
    thread_local GotohTables t;
    const std::size_t m = x.size(), n = y.size();
    t.reset(m + 1, n + 1);
    const double go = model.gap_open, ge = model.gap_extend;
    t.match[0] = 0.0;  // empty prefix acts as the start state
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            const std::size_t k = t.at(i, j);
            if (i > 0 && j > 0) {
                const std::size_t p = t.at(i - 1, j - 1);
                const double best = std::max({t.match[p], t.gap_x[p], t.gap_y[p]});
                t.match[k] = best + model.score(x.segments[i - 1], y.segments[j - 1]);
            }
            if (i > 0) {
                const std::size_t p = t.at(i - 1, j);
                t.gap_y[k] = std::max(t.match[p] + go, t.gap_y[p] + ge);
            }
            if (j > 0) {
                const std::size_t p = t.at(i, j - 1);
                t.gap_x[k] = std::max(t.match[p] + go, t.gap_x[p] + ge);
            }
        }
    }
    return t;
}

void require_nonempty(const Form& x, const Form& y) {
    if (x.segments.empty() || y.segments.empty())
        fail(ErrorCode::EmptyForm, "alignment of an empty form");
}

// Picks the first state (in preference order) whose value equals best.
State prefer(double best, double m, double gx, double /*gy*/) {
    if (m == best) return kMatch;
    if (gx == best) return kGapX;
    return kGapY;
}

}  // namespace

std::pair<std::string, std::string> Alignment::render() const {
    std::pair<std::string, std::string> out;
    for (std::size_t i = 0; i < gapped_a.size(); ++i) {
        out.first.push_back(gapped_a[i] == kGap ? '-'
                                                : SoundClassAlphabet::symbol(static_cast<Symbol>(gapped_a[i])));
        out.second.push_back(gapped_b[i] == kGap ? '-'
                                                 : SoundClassAlphabet::symbol(static_cast<Symbol>(gapped_b[i])));
    }
    return out;
}

std::size_t levenshtein(const Form& x, const Form& y) {
    const auto& a = x.segments;
    const auto& b = y.segments;
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double ldn(const Form& x, const Form& y) {
    require_nonempty(x, y);
    return static_cast<double>(levenshtein(x, y)) /
           static_cast<double>(std::max(x.size(), y.size()));
}

std::vector<std::pair<int, int>> levenshtein_alignment(const Form& x, const Form& y) {
    const auto& a = x.segments;
    const auto& b = y.segments;
    const std::size_t m = a.size(), n = b.size(), w = n + 1;
    std::vector<std::size_t> d((m + 1) * w);
    for (std::size_t i = 0; i <= m; ++i) d[i * w] = i;
    for (std::size_t j = 0; j <= n; ++j) d[j] = j;
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            d[i * w + j] = std::min({d[(i - 1) * w + j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1),
                                     d[(i - 1) * w + j] + 1, d[i * w + j - 1] + 1});

    std::vector<std::pair<int, int>> cols;
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            d[i * w + j] == d[(i - 1) * w + j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)) {
            cols.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
            --i, --j;
        } else if (i > 0 && d[i * w + j] == d[(i - 1) * w + j] + 1) {
            cols.emplace_back(static_cast<int>(i - 1), -1);
            --i;
        } else {
            cols.emplace_back(-1, static_cast<int>(j - 1));
            --j;
        }
    }
    std::reverse(cols.begin(), cols.end());
    return cols;
}

double pmi_similarity(const Form& x, const Form& y, const PmiModel& model) {
    require_nonempty(x, y);
    const auto& t = fill(x, y, model);
    const std::size_t k = t.at(x.size(), y.size());
    return std::max({t.match[k], t.gap_x[k], t.gap_y[k]});
}

Alignment align_pmi(const Form& x, const Form& y, const PmiModel& model) {
    require_nonempty(x, y);
    const auto& t = fill(x, y, model);
    const double go = model.gap_open, ge = model.gap_extend;

    std::size_t i = x.size(), j = y.size();
    const std::size_t k = t.at(i, j);
    Alignment aln;
    aln.score = std::max({t.match[k], t.gap_x[k], t.gap_y[k]});
    State state = prefer(aln.score, t.match[k], t.gap_x[k], t.gap_y[k]);

    while (i > 0 || j > 0) {
        if (state == kMatch) {
            aln.gapped_a.push_back(x.segments[i - 1]);
            aln.gapped_b.push_back(y.segments[j - 1]);
            const std::size_t p = t.at(i - 1, j - 1);
            --i, --j;
            if (i == 0 && j == 0) break;
            const double pm = t.match[p], px = t.gap_x[p], py = t.gap_y[p];
            state = prefer(std::max({pm, px, py}), pm, px, py);
        } else if (state == kGapY) {
            aln.gapped_a.push_back(x.segments[i - 1]);
            aln.gapped_b.push_back(Alignment::kGap);
            const std::size_t p = t.at(i - 1, j);
            const double from_match = t.match[p] + go, from_gap = t.gap_y[p] + ge;
            --i;
            state = from_match >= from_gap ? kMatch : kGapY;
            if (i == 0 && j == 0) break;
        } else {
            aln.gapped_a.push_back(Alignment::kGap);
            aln.gapped_b.push_back(y.segments[j - 1]);
            const std::size_t p = t.at(i, j - 1);
            const double from_match = t.match[p] + go, from_gap = t.gap_x[p] + ge;
            --j;
            state = from_match >= from_gap ? kMatch : kGapX;
            if (i == 0 && j == 0) break;
        }
    }
    std::reverse(aln.gapped_a.begin(), aln.gapped_a.end());
    std::reverse(aln.gapped_b.begin(), aln.gapped_b.end());
    return aln;
}

void write_model_scores(const PmiModel& model, std::ostream& out) {
    csv::Row header;
    for (char c : SoundClassAlphabet::kSymbols) header.emplace_back(1, c);
    csv::write_row(out, header);
    for (std::size_t a = 0; a < kAlphabetSize; ++a) {
        csv::Row row;
        for (std::size_t b = 0; b < kAlphabetSize; ++b)
            row.push_back(format_double(model.scores[a * kAlphabetSize + b]));
        csv::write_row(out, row);
    }
}

void write_model_gaps(const PmiModel& model, std::ostream& out) {
    csv::write_row(out, {"gap_open", "gap_extend"});
    csv::write_row(out, {format_double(model.gap_open), format_double(model.gap_extend)});
}

void read_model_scores(PmiModel& model, std::istream& in) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row) || row.size() != kAlphabetSize)
        fail(ErrorCode::ParseError, "model: expected a header of 41 symbols");
    // Columns may come in any order; map them onto alphabet indices.
    std::array<Symbol, kAlphabetSize> column{};
    std::array<bool, kAlphabetSize> present{};
    for (std::size_t i = 0; i < kAlphabetSize; ++i) {
        const auto sym = row[i].size() == 1 ? SoundClassAlphabet::index_of(row[i][0]) : std::nullopt;
        if (!sym || present[*sym])
            fail(ErrorCode::ParseError, "model header: bad symbol '" + row[i] + "'");
        present[*sym] = true;
        column[i] = *sym;
    }
    for (std::size_t r = 0; r < kAlphabetSize; ++r) {
        if (!reader.next(row) || row.size() != kAlphabetSize)
            fail(ErrorCode::ParseError, "model: line " + std::to_string(r + 2) +
                                            ": expected 41 values");
        for (std::size_t c = 0; c < kAlphabetSize; ++c)
            model.at(column[r], column[c]) =
                parse_double(row[c], "model line " + std::to_string(r + 2));
    }
}

void read_model_gaps(PmiModel& model, std::istream& in) {
    csv::Reader reader(in);
    csv::Row header, values;
    if (!reader.next(header) || header.size() != 2 || header[0] != "gap_open" ||
        header[1] != "gap_extend")
        fail(ErrorCode::ParseError, "gap file: expected header 'gap_open,gap_extend'");
    if (!reader.next(values) || values.size() != 2)
        fail(ErrorCode::ParseError, "gap file: expected one value row");
    model.gap_open = parse_double(values[0], "gap_open");
    model.gap_extend = parse_double(values[1], "gap_extend");
}

std::string gaps_path_for(const std::string& scores_path) {
    const std::string ext = ".csv";
    if (scores_path.size() >= ext.size() &&
        scores_path.compare(scores_path.size() - ext.size(), ext.size(), ext) == 0)
        return scores_path.substr(0, scores_path.size() - ext.size()) + ".gaps.csv";
    return scores_path + ".gaps.csv";
}

void save_model(const PmiModel& model, const std::string& scores_path) {
    std::ofstream scores(scores_path, std::ios::binary);
    if (!scores) fail(ErrorCode::Io, "cannot write " + scores_path);
    write_model_scores(model, scores);
    const auto gp = gaps_path_for(scores_path);
    std::ofstream gaps(gp, std::ios::binary);
    if (!gaps) fail(ErrorCode::Io, "cannot write " + gp);
    write_model_gaps(model, gaps);
}

PmiModel load_model(const std::string& scores_path) {
    PmiModel model;
    std::ifstream scores(scores_path, std::ios::binary);
    if (!scores) fail(ErrorCode::Io, "cannot open " + scores_path);
    read_model_scores(model, scores);
    const auto gp = gaps_path_for(scores_path);
    std::ifstream gaps(gp, std::ios::binary);
    if (!gaps) fail(ErrorCode::Io, "cannot open " + gp);
    read_model_gaps(model, gaps);
    return model;
}

}  // namespace lexiphylo
