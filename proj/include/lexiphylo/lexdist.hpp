#pragma once
// Calibrated language distances. For each concept the best word-pair
// similarity is ranked against the cross-concept (non-synonymous) panel of
// the same two word lists, giving a p-value; p-values are combined
// Fisher-style into a Z statistic and mapped onto [0, 1].

#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexiphylo/align.hpp"
#include "lexiphylo/corpus.hpp"

namespace lexiphylo {

using SimilarityFn = std::function<double(const Form&, const Form&)>;

// The model must outlive the returned function.
SimilarityFn pmi_similarity_fn(const PmiModel& model);
SimilarityFn ldn_similarity_fn();  // 1 - LDN

// Bounds of Z for two complete 40-concept lists; used for every pair.
inline const double kZMax = (40.0 * std::log(40.0 * 40.0 - 40.0 + 1.0) - 40.0) / std::sqrt(40.0);
inline const double kZMin = -std::sqrt(40.0);

struct ConceptSimilarityTable {
    std::size_t concepts = 0;
    std::vector<double> values;  // row: concept in l1, column: concept in l2; NaN = undefined

    double at(std::size_t c1, std::size_t c2) const { return values[c1 * concepts + c2]; }
    bool defined(std::size_t c1, std::size_t c2) const { return !std::isnan(at(c1, c2)); }
};

ConceptSimilarityTable concept_similarities(const Doculect& l1, const Doculect& l2,
                                            const SimilarityFn& simfn);

// (1 + #{off-diagonal cells >= table(c,c)}) / (1 + #{off-diagonal cells}).
double p_value(const ConceptSimilarityTable& table, std::size_t c);

// Off-diagonal cells, sorted ascending.
std::vector<double> calibration_panel(const ConceptSimilarityTable& table);
// (1 + #{panel >= similarity}) / (1 + |panel|)
double panel_p_value(std::span<const double> panel, double similarity);

// p_value for every concept at once; NaN where (c,c) is undefined.
std::vector<double> p_values(const ConceptSimilarityTable& table);

// (sum(-log p) - N) / sqrt(N)
double z_score(std::span<const double> p);

double distance_from_z(double z);

struct LanguagePairStats {
    std::vector<double> p_values;  // per concept; NaN where not shared
    std::size_t shared = 0;        // N
    double z = 0.0;
    double distance = 0.0;
};

// Throws NoSharedConcepts when the lists share no concept.
LanguagePairStats language_pair_stats(const Doculect& l1, const Doculect& l2,
                                      const SimilarityFn& simfn);
double language_distance(const Doculect& l1, const Doculect& l2, const SimilarityFn& simfn);

class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::vector<std::string> ids);

    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    double at(std::size_t i, std::size_t j) const { return values_[i * size() + j]; }
    bool missing(std::size_t i, std::size_t j) const { return missing_[i * size() + j] != 0; }
    bool has_missing() const;
    void set(std::size_t i, std::size_t j, double v);
    void set_missing(std::size_t i, std::size_t j);

    std::optional<std::size_t> index_of(std::string_view id) const;
    DistanceMatrix subset(const std::vector<std::string>& ids) const;

private:
    std::vector<std::string> ids_;
    std::vector<double> values_;
    std::vector<unsigned char> missing_;
};

// All unordered pairs; pairs without shared concepts are masked missing.
DistanceMatrix distance_matrix(const Corpus& corpus, const SimilarityFn& simfn);
DistanceMatrix distance_matrix(const Corpus& corpus, const PmiModel& model);
DistanceMatrix ldn_distance_matrix(const Corpus& corpus);

// CSV: header ",id1,...,idn", then one row per id; empty cell = missing.
void write_distance_csv(const DistanceMatrix& d, std::ostream& out);
DistanceMatrix read_distance_csv(std::istream& in);
void save_distance_csv(const DistanceMatrix& d, const std::string& path);
DistanceMatrix load_distance_csv(const std::string& path);

// NEXUS TAXA + DISTANCES blocks, full square matrix, '?' = missing.
void write_distance_nexus(const DistanceMatrix& d, std::ostream& out);
void save_distance_nexus(const DistanceMatrix& d, const std::string& path);

// Taxon label safe for NEXUS/Newick (quoted when needed).
std::string nexus_label(const std::string& name);

}  // namespace lexiphylo
