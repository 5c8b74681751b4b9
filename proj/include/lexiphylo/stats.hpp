#pragma once
// Validation statistics: great-circle and character-vector distances,
// Mantel tests and correlograms, PGLS on root-to-tip data, Holm-Bonferroni,
// and the per-family punctuated-evolution workflow.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexiphylo/chars.hpp"
#include "lexiphylo/corpus.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/phylo.hpp"

namespace lexiphylo {

constexpr double kEarthRadiusKm = 6371.0;

// Haversine distance in km; degrees in.
double great_circle(double lat1, double lon1, double lat2, double lon2);

// Doculects without coordinates get missing entries.
DistanceMatrix geo_matrix(const Corpus& corpus);

// 1 - cos over characters defined for both taxa.
double cosine_character_distance(const CharacterMatrix& matrix, std::size_t t1, std::size_t t2);
DistanceMatrix cosine_distance_matrix(const CharacterMatrix& matrix);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct MantelResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t pairs = 0;
    std::size_t permutations = 0;
};

// b is reordered to a's taxa; both must be complete.
MantelResult mantel(const DistanceMatrix& a, const DistanceMatrix& b, std::size_t permutations = 999,
                    std::uint64_t seed = 1);

struct CorrelogramBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t pairs = 0;
    bool empty = false;
    double r = 0.0;
    double p = 1.0;
    bool significant = false;  // p < 0.05
};

std::vector<double> default_correlogram_edges();  // 0, 1000, ..., 10000 km

// Per distance class [lower, upper) (last class closed), Mantel test of the
// class-membership matrix (0 inside, 1 outside) against ling.
std::vector<CorrelogramBin> mantel_correlogram(const DistanceMatrix& geo, const DistanceMatrix& ling,
                                               const std::vector<double>& edges, std::size_t permutations = 999,
                                               std::uint64_t seed = 1);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double standard_error = 0.0;
    double t = 0.0;
    double p_value = 1.0;  // two-sided
    std::size_t n_taxa = 0;
};

// Brownian covariance of the leaves: shared root-to-MRCA path length.
std::vector<std::vector<double>> brownian_covariance(const Tree& tree, const std::vector<std::string>& leaves);

RegressionResult gls(std::span<const double> x, std::span<const double> y,
                     const std::vector<std::vector<double>>& covariance);
RegressionResult pgls(const Tree& tree, const std::map<std::string, double>& x,
                      const std::map<std::string, double>& y);
// x = root-to-tip path length, y = branching nodes on the path.
RegressionResult pgls_path_stats(const Tree& tree);

std::vector<bool> holm_bonferroni(std::span<const double> p, double alpha = 0.05);

struct PunctuationRow {
    std::string family;
    std::string status;  // tested, delta_positive, no_delta_flag, too_few_taxa
    RegressionResult regression;
    bool significant = false;  // Holm-corrected and positive slope
    std::string outgroup;      // when the tree was inferred here
};

struct PunctuationOptions {
    std::size_t min_taxa = 10;
    double alpha = 0.05;
};

// trees: rooted family trees with the outgroup removed. Families without a
// tree get BIONJ on the family plus its selected outgroup, rooted there.
std::vector<PunctuationRow> punctuation_analysis(const Corpus& corpus, const DistanceMatrix& dmatrix,
                                                 const std::map<std::string, Tree>& trees,
                                                 const std::map<std::string, bool>& delta_flags,
                                                 const PunctuationOptions& options = {});

void write_punctuation_table(const std::vector<PunctuationRow>& rows, std::ostream& out);
std::map<std::string, bool> read_delta_flags(std::istream& in);

}  // namespace lexiphylo
