#include "lexiphylo/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "lexiphylo/csv.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/numfmt.hpp"

namespace lexiphylo {

namespace {

const std::vector<std::string> kAsjpConcepts = {
    "I",     "you",   "we",     "one",   "two",   "person", "fish",  "dog",   "louse",
    "tree",  "leaf",  "skin",   "blood", "bone",  "horn",   "ear",   "eye",   "nose",
    "tooth", "tongue", "knee",  "hand",  "breast", "liver", "drink", "see",   "hear",
    "die",   "come",  "sun",    "star",  "water", "stone",  "fire",  "path",  "mountain",
    "night", "full",  "new",    "name"};

const csv::Row kCorpusHeader = {"doculect_id", "doculect_name", "family", "classification_path",
                                "latitude",    "longitude",     "concept", "transcription"};
const csv::Row kGoldHeader = {"family", "doculect_id", "concept", "transcription",
                              "cognate_class"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_nonnatural(const Doculect& d) {
    static const std::array<std::string_view, 5> markers = {"reconstructed", "artificial",
                                                            "pidgin", "creole", "fake"};
    auto marked = [](std::string_view level) {
        const std::string l = lower(trim(level));
        for (auto m : markers)
            if (l.rfind(m, 0) == 0) return true;
        return false;
    };
    if (marked(d.family)) return true;
    return std::any_of(d.classification_path.begin(), d.classification_path.end(), marked);
}

std::optional<double> parse_coordinate(const std::string& field, std::size_t line) {
    const auto t = trim(field);
    if (t.empty()) return std::nullopt;
    return parse_double(t, "line " + std::to_string(line));
}

void expect_header(const csv::Row& got, const csv::Row& want) {
    csv::Row trimmed;
    for (auto& f : got) trimmed.emplace_back(trim(f));
    if (!trimmed.empty() && trimmed[0].rfind("\xEF\xBB\xBF", 0) == 0) trimmed[0].erase(0, 3);
    if (trimmed != want) {
        std::string expected;
        for (auto& w : want) expected += (expected.empty() ? "" : ",") + w;
        fail(ErrorCode::ParseError, "line 1: expected header '" + expected + "'");
    }
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

// Leaves the frequencies at zero for a corpus without any forms.
void refresh_frequencies(Corpus& corpus) {
    const auto counts = symbol_counts(corpus);
    if (std::any_of(counts.begin(), counts.end(), [](auto c) { return c > 0; }))
        corpus.alphabet = estimate_frequencies(corpus);
}

}  // namespace

std::optional<Symbol> SoundClassAlphabet::index_of(char c) noexcept {
    static const auto table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (std::size_t i = 0; i < kSymbols.size(); ++i)
            t[static_cast<unsigned char>(kSymbols[i])] = static_cast<int>(i);
        return t;
    }();
    const int v = table[static_cast<unsigned char>(c)];
    if (v < 0) return std::nullopt;
    return static_cast<Symbol>(v);
}

std::string Form::text() const {
    std::string out;
    out.reserve(segments.size());
    for (Symbol s : segments) out.push_back(SoundClassAlphabet::symbol(s));
    return out;
}

std::optional<std::size_t> Corpus::doculect_index(std::string_view id) const {
    for (std::size_t i = 0; i < doculects.size(); ++i)
        if (doculects[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> Corpus::concept_index(std::string_view name) const {
    for (std::size_t i = 0; i < concepts.size(); ++i)
        if (concepts[i] == name) return i;
    return std::nullopt;
}

const std::vector<std::string>& asjp_concepts() { return kAsjpConcepts; }

Form strip_diacritics(std::string_view raw) {
    const auto text = trim(raw);
    if (text.empty()) fail(ErrorCode::EmptyForm, "empty transcription");

    Form form;
    form.raw = std::string(text);
    auto& seg = form.segments;
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '*' || c == '"' || c == '%' || std::isspace(static_cast<unsigned char>(c)))
            continue;
        if (c == '~' || c == '$') {
            // Merge the preceding 2 (~) or 3 ($) segments into the first one.
            const std::size_t span = c == '~' ? 2 : 3;
            if (seg.empty())
                fail(ErrorCode::UnknownSymbol,
                     "'" + form.raw + "' position " + std::to_string(pos) +
                         ": modifier without preceding symbol");
            const std::size_t n = std::min(span, seg.size());
            seg.resize(seg.size() - n + 1);
            continue;
        }
        const auto sym = SoundClassAlphabet::index_of(c);
        if (!sym)
            fail(ErrorCode::UnknownSymbol,
                 "'" + form.raw + "' position " + std::to_string(pos) + ": '" + c + "'");
        seg.push_back(*sym);
    }
    if (seg.empty()) fail(ErrorCode::EmptyForm, "'" + form.raw + "' has no sound classes");
    return form;
}

Corpus load_corpus(const std::string& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return read_corpus(in, options);
}

Corpus read_corpus(std::istream& in, const LoadOptions& options) {
    Corpus corpus;
    corpus.concepts = asjp_concepts();

    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) fail(ErrorCode::ParseError, "line 1: empty file");
    expect_header(row, kCorpusHeader);

    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::vector<bool>> seen_concept;
    std::size_t current = static_cast<std::size_t>(-1);

    while (reader.next(row)) {
        const std::size_t line = reader.line();
        if (row.size() == 1 && trim(row[0]).empty()) continue;  // blank line
        if (row.size() != kCorpusHeader.size())
            fail(ErrorCode::ParseError, at_line(line) + ": expected 8 fields, got " +
                                            std::to_string(row.size()));
        Doculect meta;
        meta.id = std::string(trim(row[0]));
        meta.name = std::string(trim(row[1]));
        meta.family = std::string(trim(row[2]));
        if (!trim(row[3]).empty())
            for (auto& level : split(trim(row[3]), '/')) meta.classification_path.emplace_back(trim(level));
        meta.latitude = parse_coordinate(row[4], line);
        meta.longitude = parse_coordinate(row[5], line);
        if (meta.id.empty()) fail(ErrorCode::ParseError, at_line(line) + ": empty doculect_id");

        const auto concept_idx = corpus.concept_index(trim(row[6]));
        if (!concept_idx)
            fail(ErrorCode::UnknownConcept,
                 at_line(line) + ": concept '" + std::string(trim(row[6])) + "' not in " +
                     std::string(kConceptListVersion));

        auto it = index.find(meta.id);
        if (it == index.end()) {
            meta.entries.resize(corpus.concepts.size());
            it = index.emplace(meta.id, corpus.doculects.size()).first;
            corpus.doculects.push_back(std::move(meta));
            seen_concept.emplace_back(corpus.concepts.size(), false);
        } else {
            const Doculect& d = corpus.doculects[it->second];
            // Rows of one doculect must be contiguous and carry identical metadata.
            if (it->second != current || d.name != meta.name || d.family != meta.family ||
                d.classification_path != meta.classification_path ||
                d.latitude != meta.latitude || d.longitude != meta.longitude)
                fail(ErrorCode::DuplicateDoculect, at_line(line) + ": " + meta.id);
        }
        current = it->second;
        if (seen_concept[current][*concept_idx])
            fail(ErrorCode::DuplicateDoculect, at_line(line) + ": " + meta.id +
                                                   " lists concept " + corpus.concepts[*concept_idx] +
                                                   " twice");
        seen_concept[current][*concept_idx] = true;

        auto& entry = corpus.doculects[current].entries[*concept_idx];
        for (auto& synonym : split(row[7], ',')) {
            if (trim(synonym).empty()) continue;
            try {
                entry.push_back(strip_diacritics(synonym));
            } catch (const Error& e) {
                fail(e.code(), at_line(line) + ": " + e.what());
            }
        }
    }

    if (options.exclude_nonnatural)
        std::erase_if(corpus.doculects, [](const Doculect& d) { return is_nonnatural(d); });
    refresh_frequencies(corpus);
    return corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    csv::write_row(out, kCorpusHeader);
    for (const auto& d : corpus.doculects) {
        std::string path;
        for (const auto& level : d.classification_path) path += (path.empty() ? "" : "/") + level;
        for (std::size_t c = 0; c < corpus.concepts.size(); ++c) {
            std::string transcription;
            if (c < d.entries.size())
                for (const auto& f : d.entries[c])
                    transcription += (transcription.empty() ? "" : ", ") + f.raw;
            csv::write_row(out, {d.id, d.name, d.family, path,
                                 d.latitude ? format_double(*d.latitude) : "",
                                 d.longitude ? format_double(*d.longitude) : "",
                                 corpus.concepts[c], transcription});
        }
    }
}

GoldStandard load_gold(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return read_gold(in);
}

GoldStandard read_gold(std::istream& in) {
    GoldStandard gold;
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) fail(ErrorCode::ParseError, "line 1: empty file");
    expect_header(row, kGoldHeader);
    const auto& concepts = asjp_concepts();
    while (reader.next(row)) {
        const std::size_t line = reader.line();
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        if (row.size() != kGoldHeader.size())
            fail(ErrorCode::ParseError, at_line(line) + ": expected 5 fields, got " +
                                            std::to_string(row.size()));
        GoldRecord rec;
        rec.family = std::string(trim(row[0]));
        rec.doculect_id = std::string(trim(row[1]));
        rec.concept_name = std::string(trim(row[2]));
        rec.cognate_class = std::string(trim(row[4]));
        if (std::find(concepts.begin(), concepts.end(), rec.concept_name) == concepts.end())
            fail(ErrorCode::UnknownConcept, at_line(line) + ": concept '" + rec.concept_name + "'");
        if (trim(row[3]).empty()) continue;  // missing entry
        if (rec.cognate_class.empty())
            fail(ErrorCode::ParseError, at_line(line) + ": empty cognate_class");
        try {
            rec.form = strip_diacritics(row[3]);
        } catch (const Error& e) {
            fail(e.code(), at_line(line) + ": " + e.what());
        }
        gold.records.push_back(std::move(rec));
    }
    return gold;
}

void write_gold(const GoldStandard& gold, std::ostream& out) {
    csv::write_row(out, kGoldHeader);
    for (const auto& r : gold.records)
        csv::write_row(out, {r.family, r.doculect_id, r.concept_name, r.form.raw, r.cognate_class});
}

Corpus corpus_from_gold(const GoldStandard& gold) {
    Corpus corpus;
    corpus.concepts = asjp_concepts();
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& r : gold.records) {
        auto it = index.find(r.doculect_id);
        if (it == index.end()) {
            Doculect d;
            d.id = r.doculect_id;
            d.name = r.doculect_id;
            d.family = r.family;
            d.entries.resize(corpus.concepts.size());
            it = index.emplace(r.doculect_id, corpus.doculects.size()).first;
            corpus.doculects.push_back(std::move(d));
        } else if (corpus.doculects[it->second].family != r.family) {
            fail(ErrorCode::InvalidArgument,
                 "doculect " + r.doculect_id + " listed under families " +
                     corpus.doculects[it->second].family + " and " + r.family);
        }
        const auto c = corpus.concept_index(r.concept_name);
        if (!c) fail(ErrorCode::UnknownConcept, r.concept_name);
        corpus.doculects[it->second].entries[*c].push_back(r.form);
    }
    refresh_frequencies(corpus);
    return corpus;
}

std::array<std::uint64_t, kAlphabetSize> symbol_counts(const Corpus& corpus) {
    std::array<std::uint64_t, kAlphabetSize> counts{};
    for (const auto& d : corpus.doculects)
        for (const auto& entry : d.entries)
            for (const auto& f : entry)
                for (Symbol s : f.segments) ++counts[s];
    return counts;
}

SoundClassAlphabet estimate_frequencies(const Corpus& corpus) {
    const auto counts = symbol_counts(corpus);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) fail(ErrorCode::EmptyCorpus, "corpus has no segments");
    SoundClassAlphabet alphabet;
    for (std::size_t a = 0; a < kAlphabetSize; ++a)
        alphabet.frequency[a] = static_cast<double>(counts[a]) / static_cast<double>(total);
    return alphabet;
}

}  // namespace lexiphylo
