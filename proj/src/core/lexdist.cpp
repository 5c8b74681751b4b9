#include "lexiphylo/lexdist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "lexiphylo/csv.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"
#include "lexiphylo/parallel.hpp"

namespace lexiphylo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SimilarityFn pmi_similarity_fn(const PmiModel& model) {
    return [&model](const Form& x, const Form& y) { return pmi_similarity(x, y, model); };
}

SimilarityFn ldn_similarity_fn() {
    return [](const Form& x, const Form& y) { return 1.0 - ldn(x, y); };
}

ConceptSimilarityTable concept_similarities(const Doculect& l1, const Doculect& l2,
                                            const SimilarityFn& simfn) {
    const std::size_t n = std::max(l1.entries.size(), l2.entries.size());
    ConceptSimilarityTable table;
    table.concepts = n;
    table.values.assign(n * n, kNaN);
    for (std::size_t c1 = 0; c1 < n; ++c1) {
        if (!l1.has(c1)) continue;
        for (std::size_t c2 = 0; c2 < n; ++c2) {
            if (!l2.has(c2)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& w1 : l1.entries[c1])
                for (const auto& w2 : l2.entries[c2]) best = std::max(best, simfn(w1, w2));
            table.values[c1 * n + c2] = best;
        }
    }
    return table;
}

double p_value(const ConceptSimilarityTable& table, std::size_t c) {
    if (c >= table.concepts || !table.defined(c, c))
        fail(ErrorCode::UndefinedConcept, "concept " + std::to_string(c) + " not shared");
    const double x = table.at(c, c);
    std::size_t above = 0, total = 0;
    for (std::size_t i = 0; i < table.concepts; ++i)
        for (std::size_t j = 0; j < table.concepts; ++j) {
            if (i == j || !table.defined(i, j)) continue;
            ++total;
            if (table.at(i, j) >= x) ++above;
        }
    return static_cast<double>(1 + above) / static_cast<double>(1 + total);
}

std::vector<double> calibration_panel(const ConceptSimilarityTable& table) {
    const std::size_t n = table.concepts;
    std::vector<double> panel;
    panel.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && table.defined(i, j)) panel.push_back(table.at(i, j));
    std::sort(panel.begin(), panel.end());
    return panel;
}

double panel_p_value(std::span<const double> panel, double similarity) {
    const auto first_ge = std::lower_bound(panel.begin(), panel.end(), similarity);
    const auto above = static_cast<std::size_t>(panel.end() - first_ge);
    return static_cast<double>(1 + above) / static_cast<double>(1 + panel.size());
}

std::vector<double> p_values(const ConceptSimilarityTable& table) {
    const auto panel = calibration_panel(table);
    std::vector<double> p(table.concepts, kNaN);
    for (std::size_t c = 0; c < table.concepts; ++c)
        if (table.defined(c, c)) p[c] = panel_p_value(panel, table.at(c, c));
    return p;
}

double z_score(std::span<const double> p) {
    if (p.empty()) fail(ErrorCode::EmptyList, "z_score of no p-values");
    double sum = 0.0;
    for (double v : p) sum += -std::log(v);
    const double n = static_cast<double>(p.size());
    return (sum - n) / std::sqrt(n);
}

double distance_from_z(double z) { return (kZMax - z) / (kZMax - kZMin); }

LanguagePairStats language_pair_stats(const Doculect& l1, const Doculect& l2,
                                      const SimilarityFn& simfn) {
    const auto table = concept_similarities(l1, l2, simfn);
    LanguagePairStats stats;
    stats.p_values = p_values(table);
    std::vector<double> shared;
    for (double p : stats.p_values)
        if (!std::isnan(p)) shared.push_back(p);
    if (shared.empty())
        fail(ErrorCode::NoSharedConcepts, l1.id + " and " + l2.id + " share no concept");
    stats.shared = shared.size();
    stats.z = z_score(shared);
    stats.distance = distance_from_z(stats.z);
    return stats;
}

double language_distance(const Doculect& l1, const Doculect& l2, const SimilarityFn& simfn) {
    return language_pair_stats(l1, l2, simfn).distance;
}

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids)
    : ids_(std::move(ids)),
      values_(ids_.size() * ids_.size(), 0.0),
      missing_(ids_.size() * ids_.size(), 0) {}

bool DistanceMatrix::has_missing() const {
    return std::any_of(missing_.begin(), missing_.end(), [](unsigned char m) { return m != 0; });
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
    values_[i * size() + j] = values_[j * size() + i] = v;
    missing_[i * size() + j] = missing_[j * size() + i] = 0;
}

void DistanceMatrix::set_missing(std::size_t i, std::size_t j) {
    values_[i * size() + j] = values_[j * size() + i] = kNaN;
    missing_[i * size() + j] = missing_[j * size() + i] = 1;
}

std::optional<std::size_t> DistanceMatrix::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return i;
    return std::nullopt;
}

DistanceMatrix DistanceMatrix::subset(const std::vector<std::string>& ids) const {
    DistanceMatrix out(ids);
    std::vector<std::size_t> idx;
    for (const auto& id : ids) {
        const auto i = index_of(id);
        if (!i) fail(ErrorCode::TaxaMismatch, "no taxon '" + id + "' in distance matrix");
        idx.push_back(*i);
    }
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            if (missing(idx[a], idx[b]))
                out.set_missing(a, b);
            else
                out.set(a, b, at(idx[a], idx[b]));
        }
    return out;
}

DistanceMatrix distance_matrix(const Corpus& corpus, const SimilarityFn& simfn) {
    std::vector<std::string> ids;
    for (const auto& d : corpus.doculects) ids.push_back(d.id);
    DistanceMatrix out(ids);
    const std::size_t n = ids.size();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::vector<double> result(pairs.size(), kNaN);
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        try {
            result[k] = language_distance(corpus.doculects[i], corpus.doculects[j], simfn);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoSharedConcepts) throw;
        }
    });
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (std::isnan(result[k]))
            out.set_missing(pairs[k].first, pairs[k].second);
        else
            out.set(pairs[k].first, pairs[k].second, result[k]);
    }
    return out;
}

DistanceMatrix distance_matrix(const Corpus& corpus, const PmiModel& model) {
    return distance_matrix(corpus, pmi_similarity_fn(model));
}

DistanceMatrix ldn_distance_matrix(const Corpus& corpus) {
    return distance_matrix(corpus, ldn_similarity_fn());
}

void write_distance_csv(const DistanceMatrix& d, std::ostream& out) {
    csv::Row header{""};
    for (const auto& id : d.ids()) header.push_back(id);
    csv::write_row(out, header);
    for (std::size_t i = 0; i < d.size(); ++i) {
        csv::Row row{d.ids()[i]};
        for (std::size_t j = 0; j < d.size(); ++j)
            row.push_back(i == j ? "0" : d.missing(i, j) ? "" : format_double(d.at(i, j)));
        csv::write_row(out, row);
    }
}

DistanceMatrix read_distance_csv(std::istream& in) {
    csv::Reader reader(in);
    csv::Row header;
    if (!reader.next(header) || header.empty())
        fail(ErrorCode::ParseError, "distance matrix: missing header");
    std::vector<std::string> ids(header.begin() + 1, header.end());
    DistanceMatrix d(ids);
    const std::size_t n = ids.size();
    csv::Row row;
    std::vector<std::vector<std::string>> cells;
    for (std::size_t i = 0; i < n; ++i) {
        if (!reader.next(row) || row.size() != n + 1)
            fail(ErrorCode::ParseError, "distance matrix: line " + std::to_string(i + 2) +
                                            ": expected " + std::to_string(n + 1) + " fields");
        if (row[0] != ids[i])
            fail(ErrorCode::ParseError, "distance matrix: line " + std::to_string(i + 2) +
                                            ": row id '" + row[0] + "' != column id '" + ids[i] +
                                            "'");
        cells.emplace_back(row.begin() + 1, row.end());
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& c = cells[i][j];
            if (c.empty() || cells[j][i].empty()) {
                d.set_missing(i, j);
                continue;
            }
            const std::string ctx = "distance matrix line " + std::to_string(i + 2);
            const double a = parse_double(c, ctx), b = parse_double(cells[j][i], ctx);
            d.set(i, j, 0.5 * (a + b));
        }
    return d;
}

void save_distance_csv(const DistanceMatrix& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    write_distance_csv(d, out);
}

DistanceMatrix load_distance_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return read_distance_csv(in);
}

std::string nexus_label(const std::string& name) {
    const bool plain = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
    if (plain) return name;
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out.push_back('\'');
        out.push_back(c);
    }
    return out + "'";
}

void write_distance_nexus(const DistanceMatrix& d, std::ostream& out) {
    out << "#NEXUS\n\nBEGIN TAXA;\n\tDIMENSIONS NTAX=" << d.size() << ";\n\tTAXLABELS";
    for (const auto& id : d.ids()) out << ' ' << nexus_label(id);
    out << ";\nEND;\n\nBEGIN DISTANCES;\n\tDIMENSIONS NTAX=" << d.size()
        << ";\n\tFORMAT TRIANGLE=BOTH DIAGONAL LABELS=LEFT MISSING=?;\n\tMATRIX\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << '\t' << nexus_label(d.ids()[i]);
        for (std::size_t j = 0; j < d.size(); ++j)
            out << ' ' << (i == j ? "0" : d.missing(i, j) ? "?" : format_double(d.at(i, j)));
        out << '\n';
    }
    out << "\t;\nEND;\n";
}

void save_distance_nexus(const DistanceMatrix& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    write_distance_nexus(d, out);
}

}  // namespace lexiphylo
