#include "lexiphylo/chars.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "lexiphylo/error.hpp"
#include "lexiphylo/lexdist.hpp"

namespace lexiphylo {

namespace {

CharKind kind_of(const std::string& id) {
    return id.find(':') != std::string::npos ? CharKind::SoundClass : CharKind::Cognate;
}

// "dog_149" -> 149; labels without a numeric suffix sort after numbered ones.
std::size_t class_number(const std::string& label) {
    const auto pos = label.rfind('_');
    if (pos == std::string::npos) return SIZE_MAX;
    std::size_t v = 0;
    const auto* first = label.data() + pos + 1;
    const auto* last = label.data() + label.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) return SIZE_MAX;
    return v;
}

template <typename Stream>
Stream open_file(const std::string& path) {
    Stream s(path, std::ios::binary);
    if (!s) fail(ErrorCode::Io, "cannot open " + path);
    return s;
}

}  // namespace

CharacterMatrix::CharacterMatrix(std::vector<std::string> taxa, std::vector<std::string> characters,
                                 std::vector<CharKind> kinds)
    : taxa_(std::move(taxa)), characters_(std::move(characters)), kinds_(std::move(kinds)) {
    if (kinds_.size() != characters_.size()) fail(ErrorCode::SizeMismatch, "one kind per character");
    std::set<std::string> seen;
    for (const auto& c : characters_)
        if (!seen.insert(c).second) fail(ErrorCode::InvalidArgument, "duplicate character id " + c);
    values_.assign(taxa_.size() * characters_.size(), kMissing);
}

std::string CharacterMatrix::row_string(std::size_t t) const {
    std::string s(char_count(), '?');
    for (std::size_t c = 0; c < char_count(); ++c) {
        const auto v = at(t, c);
        if (v != kMissing) s[c] = v ? '1' : '0';
    }
    return s;
}

CharacterMatrix build_cognate_chars(const Corpus& corpus, const CognatePartition& partition) {
    // (doculect, concept) -> classes present
    std::map<std::pair<std::string, std::string>, std::set<std::string>> present;
    std::map<std::string, std::set<std::string>> classes;  // concept -> labels
    for (const auto& item : partition.items) {
        if (!corpus.concept_index(item.concept_name)) fail(ErrorCode::UnknownConcept, item.concept_name);
        present[{item.doculect_id, item.concept_name}].insert(item.cognate_class);
        classes[item.concept_name].insert(item.cognate_class);
    }
    struct Key {
        std::size_t concept_idx, number;
        std::string label;
    };
    std::vector<Key> keys;
    for (const auto& [name, labels] : classes)
        for (const auto& l : labels) keys.push_back({*corpus.concept_index(name), class_number(l), l});
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        return std::tie(a.concept_idx, a.number, a.label) < std::tie(b.concept_idx, b.number, b.label);
    });

    std::vector<std::string> taxa, ids;
    for (const auto& d : corpus.doculects) taxa.push_back(d.id);
    for (const auto& k : keys) ids.push_back(k.label);
    CharacterMatrix m(taxa, ids, std::vector<CharKind>(ids.size(), CharKind::Cognate));
    for (std::size_t t = 0; t < corpus.doculects.size(); ++t) {
        const auto& d = corpus.doculects[t];
        for (std::size_t k = 0; k < keys.size(); ++k) {
            if (!d.has(keys[k].concept_idx)) continue;
            const auto it = present.find({d.id, corpus.concepts[keys[k].concept_idx]});
            if (it == present.end())
                fail(ErrorCode::InvalidArgument,
                     "cognate classes do not cover " + d.id + " / " + corpus.concepts[keys[k].concept_idx]);
            m.set(t, k, it->second.count(keys[k].label) ? 1 : 0);
        }
    }
    return m;
}

CharacterMatrix build_soundclass_chars(const Corpus& corpus) {
    std::vector<std::string> taxa, ids;
    for (const auto& d : corpus.doculects) taxa.push_back(d.id);
    for (const auto& c : corpus.concepts)
        for (char s : SoundClassAlphabet::kSymbols) ids.push_back(c + ":" + s);
    CharacterMatrix m(taxa, ids, std::vector<CharKind>(ids.size(), CharKind::SoundClass));
    for (std::size_t t = 0; t < corpus.doculects.size(); ++t) {
        const auto& d = corpus.doculects[t];
        for (std::size_t c = 0; c < corpus.concepts.size(); ++c) {
            if (!d.has(c)) continue;
            std::array<bool, kAlphabetSize> has{};
            for (const auto& f : d.entries[c])
                for (Symbol s : f.segments) has[s] = true;
            for (std::size_t s = 0; s < kAlphabetSize; ++s) m.set(t, c * kAlphabetSize + s, has[s] ? 1 : 0);
        }
    }
    return m;
}

CharacterMatrix filter_variable(const CharacterMatrix& matrix, const std::vector<std::string>& taxa) {
    std::vector<std::size_t> rows;
    for (const auto& t : taxa) {
        const auto it = std::find(matrix.taxa().begin(), matrix.taxa().end(), t);
        if (it == matrix.taxa().end()) fail(ErrorCode::InvalidArgument, "taxon " + t + " not in matrix");
        rows.push_back(static_cast<std::size_t>(it - matrix.taxa().begin()));
    }
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < matrix.char_count(); ++c) {
        bool zero = false, one = false;
        for (std::size_t r : rows) {
            const auto v = matrix.at(r, c);
            zero |= v == 0;
            one |= v == 1;
        }
        if (zero && one) keep.push_back(c);
    }
    std::vector<std::string> ids;
    std::vector<CharKind> kinds;
    for (std::size_t c : keep) {
        ids.push_back(matrix.characters()[c]);
        kinds.push_back(matrix.kinds()[c]);
    }
    CharacterMatrix out(taxa, ids, kinds);
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t k = 0; k < keep.size(); ++k) out.set(t, k, matrix.at(rows[t], keep[k]));
    return out;
}

CharacterMatrix filter_variable(const CharacterMatrix& matrix) { return filter_variable(matrix, matrix.taxa()); }

CombinedMatrix combine_and_partition(const CharacterMatrix& cc, const CharacterMatrix& sc) {
    if (cc.taxa() != sc.taxa()) fail(ErrorCode::TaxaMismatch, "cc and sc matrices list different taxa");
    auto ids = cc.characters();
    ids.insert(ids.end(), sc.characters().begin(), sc.characters().end());
    auto kinds = cc.kinds();
    kinds.insert(kinds.end(), sc.kinds().begin(), sc.kinds().end());
    CombinedMatrix out{CharacterMatrix(cc.taxa(), ids, kinds), {}};
    for (std::size_t t = 0; t < cc.taxa_count(); ++t) {
        for (std::size_t c = 0; c < cc.char_count(); ++c) out.matrix.set(t, c, cc.at(t, c));
        for (std::size_t c = 0; c < sc.char_count(); ++c) out.matrix.set(t, cc.char_count() + c, sc.at(t, c));
    }
    if (cc.char_count() > 0) out.partition.blocks.push_back({"cc", 1, cc.char_count()});
    if (sc.char_count() > 0)
        out.partition.blocks.push_back({"sc", cc.char_count() + 1, cc.char_count() + sc.char_count()});
    return out;
}

std::vector<CharacterMatrix> split_partition(const CharacterMatrix& matrix, const CharPartition& partition) {
    std::vector<CharacterMatrix> out;
    for (const auto& b : partition.blocks) {
        if (b.start < 1 || b.end < b.start || b.end > matrix.char_count())
            fail(ErrorCode::OutOfRange, "partition block " + b.name + " outside the matrix");
        std::vector<std::string> ids(matrix.characters().begin() + static_cast<std::ptrdiff_t>(b.start - 1),
                                     matrix.characters().begin() + static_cast<std::ptrdiff_t>(b.end));
        std::vector<CharKind> kinds(matrix.kinds().begin() + static_cast<std::ptrdiff_t>(b.start - 1),
                                    matrix.kinds().begin() + static_cast<std::ptrdiff_t>(b.end));
        CharacterMatrix m(matrix.taxa(), ids, kinds);
        for (std::size_t t = 0; t < matrix.taxa_count(); ++t)
            for (std::size_t c = 0; c < ids.size(); ++c) m.set(t, c, matrix.at(t, b.start - 1 + c));
        out.push_back(std::move(m));
    }
    return out;
}

std::string sanitize_taxon(const std::string& name) {
    std::string s;
    for (unsigned char ch : name) {
        if (s.size() == 50) break;
        s += std::isalnum(ch) ? static_cast<char>(ch) : '_';
    }
    return s;
}

std::vector<std::string> sanitized_taxa(const std::vector<std::string>& taxa) {
    std::vector<std::string> out;
    std::map<std::string, std::string> seen;
    for (const auto& t : taxa) {
        auto s = sanitize_taxon(t);
        if (s.empty()) fail(ErrorCode::NameCollision, "taxon name '" + t + "' is empty after sanitizing");
        auto [it, fresh] = seen.try_emplace(s, t);
        if (!fresh) fail(ErrorCode::NameCollision, "taxa '" + it->second + "' and '" + t + "' both become " + s);
        out.push_back(std::move(s));
    }
    return out;
}

void write_phylip(const CharacterMatrix& matrix, std::ostream& out) {
    const auto names = sanitized_taxa(matrix.taxa());
    out << matrix.taxa_count() << ' ' << matrix.char_count() << '\n';
    for (std::size_t t = 0; t < matrix.taxa_count(); ++t) out << names[t] << '\t' << matrix.row_string(t) << '\n';
}

namespace {
std::int8_t parse_state(char ch, std::size_t line) {
    switch (ch) {
        case '0': return 0;
        case '1': return 1;
        case '?': return CharacterMatrix::kMissing;
        default: fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad character state '" + ch + "'");
    }
}
}  // namespace

CharacterMatrix read_phylip(std::istream& in, const std::vector<std::string>& characters) {
    std::string line;
    std::size_t ntax = 0, nchar = 0;
    if (!std::getline(in, line)) fail(ErrorCode::ParseError, "empty Phylip file");
    {
        std::istringstream head(line);
        if (!(head >> ntax >> nchar)) fail(ErrorCode::ParseError, "line 1: expected '<ntaxa> <nchars>'");
    }
    std::vector<std::string> ids = characters;
    if (ids.empty())
        for (std::size_t c = 0; c < nchar; ++c) ids.push_back("c" + std::to_string(c + 1));
    if (ids.size() != nchar) fail(ErrorCode::SizeMismatch, "character id count differs from Phylip header");
    std::vector<CharKind> kinds;
    for (const auto& id : ids) kinds.push_back(characters.empty() ? CharKind::SoundClass : kind_of(id));

    std::vector<std::string> taxa, rows;
    std::size_t lineno = 1;
    while (taxa.size() < ntax && std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream row(line);
        std::string name, states, more;
        row >> name;
        while (row >> more) states += more;
        if (states.size() != nchar)
            fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " + std::to_string(nchar) +
                                            " states, found " + std::to_string(states.size()));
        for (char ch : states) parse_state(ch, lineno);
        taxa.push_back(name);
        rows.push_back(states);
    }
    if (taxa.size() != ntax) fail(ErrorCode::ParseError, "Phylip file lists fewer taxa than its header");
    CharacterMatrix m(taxa, ids, kinds);
    for (std::size_t t = 0; t < ntax; ++t)
        for (std::size_t c = 0; c < nchar; ++c) m.set(t, c, parse_state(rows[t][c], t + 2));
    return m;
}

void write_partition(const CharPartition& partition, std::ostream& out) {
    for (const auto& b : partition.blocks) out << "BIN, " << b.name << " = " << b.start << '-' << b.end << '\n';
}

CharPartition read_partition(std::istream& in) {
    CharPartition p;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        const auto eq = line.find('=');
        const auto dash = line.find('-', eq == std::string::npos ? 0 : eq);
        if (comma == std::string::npos || eq == std::string::npos || dash == std::string::npos)
            fail(ErrorCode::ParseError, "partition line " + std::to_string(lineno) + ": expected 'TYPE, name = a-b'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        CharPartition::Block b;
        b.name = trim(line.substr(comma + 1, eq - comma - 1));
        try {
            b.start = std::stoul(trim(line.substr(eq + 1, dash - eq - 1)));
            b.end = std::stoul(trim(line.substr(dash + 1)));
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, "partition line " + std::to_string(lineno) + ": bad range");
        }
        p.blocks.push_back(b);
    }
    return p;
}

void write_char_nexus(const CharacterMatrix& matrix, std::ostream& out) {
    const auto names = sanitized_taxa(matrix.taxa());
    out << "#NEXUS\n\nBEGIN DATA;\n";
    out << "\tDIMENSIONS NTAX=" << matrix.taxa_count() << " NCHAR=" << matrix.char_count() << ";\n";
    out << "\tFORMAT DATATYPE=STANDARD SYMBOLS=\"01\" MISSING=?;\n";
    out << "\tCHARLABELS";
    for (const auto& c : matrix.characters()) out << "\n\t\t" << nexus_label(c);
    out << "\n\t;\n\tMATRIX\n";
    for (std::size_t t = 0; t < matrix.taxa_count(); ++t)
        out << "\t\t" << names[t] << ' ' << matrix.row_string(t) << '\n';
    out << "\t;\nEND;\n";
}

namespace {

// Whitespace / punctuation tokenizer for the subset of NEXUS we write.
class NexusTokens {
public:
    explicit NexusTokens(std::istream& in) : text_(std::istreambuf_iterator<char>(in), {}) {}

    bool next(std::string& tok) {
        skip();
        if (pos_ >= text_.size()) return false;
        tok.clear();
        const char ch = text_[pos_];
        if (ch == '\'') {
            ++pos_;
            while (pos_ < text_.size()) {
                if (text_[pos_] == '\'') {
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                        tok += '\'';
                        pos_ += 2;
                        continue;
                    }
                    ++pos_;
                    return true;
                }
                tok += text_[pos_++];
            }
            fail(ErrorCode::ParseError, "NEXUS: unterminated quoted label");
        }
        if (ch == ';' || ch == '=') {
            tok = ch;
            ++pos_;
            return true;
        }
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != ';' &&
               text_[pos_] != '=')
            tok += text_[pos_++];
        return true;
    }

private:
    void skip() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_[pos_] == '[') {
                const auto end = text_.find(']', pos_);
                pos_ = end == std::string::npos ? text_.size() : end + 1;
            } else {
                break;
            }
        }
    }

    std::string text_;
    std::size_t pos_ = 0;
};

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

CharacterMatrix read_char_nexus(std::istream& in) {
    NexusTokens tokens(in);
    std::string tok;
    std::size_t ntax = 0, nchar = 0;
    std::vector<std::string> labels, taxa, rows;
    bool seen_matrix = false;
    auto expect_number = [&](const std::string& key) -> std::size_t {
        std::string eq, v;
        if (!tokens.next(eq) || eq != "=" || !tokens.next(v)) fail(ErrorCode::ParseError, "NEXUS: bad " + key);
        try {
            return std::stoul(v);
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, "NEXUS: bad " + key + " value " + v);
        }
    };
    while (tokens.next(tok)) {
        const auto key = upper(tok);
        if (key == "NTAX") {
            ntax = expect_number("NTAX");
        } else if (key == "NCHAR") {
            nchar = expect_number("NCHAR");
        } else if (key == "CHARLABELS") {
            while (tokens.next(tok) && tok != ";") labels.push_back(tok);
        } else if (key == "MATRIX") {
            seen_matrix = true;
            std::string name, states;
            while (tokens.next(name) && name != ";") {
                if (!tokens.next(states) || states == ";") fail(ErrorCode::ParseError, "NEXUS: truncated matrix row");
                taxa.push_back(name);
                rows.push_back(states);
            }
        }
    }
    if (!seen_matrix) fail(ErrorCode::ParseError, "NEXUS: no MATRIX");
    if (taxa.size() != ntax) fail(ErrorCode::ParseError, "NEXUS: NTAX does not match the matrix");
    if (labels.empty())
        for (std::size_t c = 0; c < nchar; ++c) labels.push_back("c" + std::to_string(c + 1));
    if (labels.size() != nchar) fail(ErrorCode::ParseError, "NEXUS: CHARLABELS count differs from NCHAR");
    std::vector<CharKind> kinds;
    for (const auto& l : labels) kinds.push_back(kind_of(l));
    CharacterMatrix m(taxa, labels, kinds);
    for (std::size_t t = 0; t < ntax; ++t) {
        if (rows[t].size() != nchar) fail(ErrorCode::ParseError, "NEXUS: row " + taxa[t] + " has wrong length");
        for (std::size_t c = 0; c < nchar; ++c) m.set(t, c, parse_state(rows[t][c], 0));
    }
    return m;
}

void save_phylip(const CharacterMatrix& matrix, const std::string& path) {
    auto out = open_file<std::ofstream>(path);
    write_phylip(matrix, out);
}

void save_partition(const CharPartition& partition, const std::string& path) {
    auto out = open_file<std::ofstream>(path);
    write_partition(partition, out);
}

void save_char_nexus(const CharacterMatrix& matrix, const std::string& path) {
    auto out = open_file<std::ofstream>(path);
    write_char_nexus(matrix, out);
}

}  // namespace lexiphylo
