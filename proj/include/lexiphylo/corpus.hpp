#pragma once
// Word lists over the 41 ASJP sound classes: transcription cleanup, CSV
// ingestion of word lists and gold-standard cognacy data, symbol frequencies.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexiphylo {

constexpr std::size_t kAlphabetSize = 41;
using Symbol = std::uint8_t;

class SoundClassAlphabet {
public:
    // ASJP sound classes: consonants by place of articulation, then vowels.
    static constexpr std::string_view kSymbols = "pbfvmw8tdszcnrlSZCjT5ykgxNqXh7L4G!ieE3auo";

    static std::optional<Symbol> index_of(char c) noexcept;
    static char symbol(Symbol s) noexcept { return kSymbols[s]; }

    // q(a); all zero until estimated.
    std::array<double, kAlphabetSize> frequency{};
};

struct Form {
    std::string raw;               // transcription as written (trimmed)
    std::vector<Symbol> segments;  // sound classes after diacritic stripping

    std::string text() const;  // segments rendered back as ASJP symbols
    std::size_t size() const noexcept { return segments.size(); }
};

struct Doculect {
    std::string id;
    std::string name;
    std::string family;
    std::vector<std::string> classification_path;
    std::optional<double> latitude;
    std::optional<double> longitude;
    // Indexed by concept position in Corpus::concepts; empty = missing entry.
    std::vector<std::vector<Form>> entries;

    bool has(std::size_t c) const noexcept {
        return c < entries.size() && !entries[c].empty();
    }
};

struct Corpus {
    std::vector<Doculect> doculects;
    SoundClassAlphabet alphabet;
    std::vector<std::string> concepts;

    std::optional<std::size_t> doculect_index(std::string_view id) const;
    std::optional<std::size_t> concept_index(std::string_view name) const;
};

struct GoldRecord {
    std::string family;
    std::string doculect_id;
    std::string concept_name;
    Form form;
    std::string cognate_class;
};

struct GoldStandard {
    std::vector<GoldRecord> records;
};

// The fixed 40-item ASJP concept list, in canonical order.
const std::vector<std::string>& asjp_concepts();
inline constexpr std::string_view kConceptListVersion = "asjp40.v1";

// '~' merges the two preceding segments into the first, '$' the three
// preceding ones; '*', '"', '%' and whitespace are dropped. Throws
// UnknownSymbol for any other character and EmptyForm for empty input.
Form strip_diacritics(std::string_view raw);

struct LoadOptions {
    // Drop doculects whose family or classification marks them reconstructed,
    // artificial, pidgin or creole.
    bool exclude_nonnatural = true;
};

Corpus load_corpus(const std::string& path, const LoadOptions& options = {});
Corpus read_corpus(std::istream& in, const LoadOptions& options = {});
void write_corpus(const Corpus& corpus, std::ostream& out);

GoldStandard load_gold(const std::string& path);
GoldStandard read_gold(std::istream& in);
void write_gold(const GoldStandard& gold, std::ostream& out);

// Word lists of the gold-standard doculects, in first-appearance order.
Corpus corpus_from_gold(const GoldStandard& gold);

std::array<std::uint64_t, kAlphabetSize> symbol_counts(const Corpus& corpus);
SoundClassAlphabet estimate_frequencies(const Corpus& corpus);

}  // namespace lexiphylo
