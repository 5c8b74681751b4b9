#pragma once
// Binary character matrices: one character per cognate class and one per
// (concept, sound class) pair, plus Phylip / Nexus / partition export.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lexiphylo/cogclust.hpp"
#include "lexiphylo/corpus.hpp"

namespace lexiphylo {

enum class CharKind { Cognate, SoundClass };

class CharacterMatrix {
public:
    static constexpr std::int8_t kMissing = -1;

    CharacterMatrix() = default;
    CharacterMatrix(std::vector<std::string> taxa, std::vector<std::string> characters,
                    std::vector<CharKind> kinds);

    std::size_t taxa_count() const noexcept { return taxa_.size(); }
    std::size_t char_count() const noexcept { return characters_.size(); }
    const std::vector<std::string>& taxa() const noexcept { return taxa_; }
    const std::vector<std::string>& characters() const noexcept { return characters_; }
    const std::vector<CharKind>& kinds() const noexcept { return kinds_; }

    std::int8_t at(std::size_t t, std::size_t c) const { return values_[t * char_count() + c]; }
    void set(std::size_t t, std::size_t c, std::int8_t v) { values_[t * char_count() + c] = v; }
    std::string row_string(std::size_t t) const;  // '0', '1', '?'

    bool operator==(const CharacterMatrix&) const = default;

private:
    std::vector<std::string> taxa_;
    std::vector<std::string> characters_;
    std::vector<CharKind> kinds_;
    std::vector<std::int8_t> values_;
};

// Characters sorted by (concept, class number); missing where the concept is.
CharacterMatrix build_cognate_chars(const Corpus& corpus, const CognatePartition& partition);
// "<concept>:<symbol>" for every concept and sound class, presence semantics.
CharacterMatrix build_soundclass_chars(const Corpus& corpus);

// Rows restricted to taxa (in that order); keeps characters with at least
// one 0 and one 1 among the defined values.
CharacterMatrix filter_variable(const CharacterMatrix& matrix, const std::vector<std::string>& taxa);
CharacterMatrix filter_variable(const CharacterMatrix& matrix);

struct CharPartition {
    struct Block {
        std::string name;
        std::size_t start = 0;  // 1-based, inclusive
        std::size_t end = 0;
    };
    std::vector<Block> blocks;
};

struct CombinedMatrix {
    CharacterMatrix matrix;
    CharPartition partition;
};

CombinedMatrix combine_and_partition(const CharacterMatrix& cc, const CharacterMatrix& sc);
std::vector<CharacterMatrix> split_partition(const CharacterMatrix& matrix, const CharPartition& partition);

// Non-alphanumerics -> '_', at most 50 characters.
std::string sanitize_taxon(const std::string& name);
// Throws NameCollision when two taxa sanitize to the same name.
std::vector<std::string> sanitized_taxa(const std::vector<std::string>& taxa);

void write_phylip(const CharacterMatrix& matrix, std::ostream& out);
// Character ids default to c1..cN; kinds to SoundClass.
CharacterMatrix read_phylip(std::istream& in, const std::vector<std::string>& characters = {});
void write_partition(const CharPartition& partition, std::ostream& out);
CharPartition read_partition(std::istream& in);
void write_char_nexus(const CharacterMatrix& matrix, std::ostream& out);
CharacterMatrix read_char_nexus(std::istream& in);

void save_phylip(const CharacterMatrix& matrix, const std::string& path);
void save_partition(const CharPartition& partition, const std::string& path);
void save_char_nexus(const CharacterMatrix& matrix, const std::string& path);

}  // namespace lexiphylo
