#pragma once
// Estimation of PMI sound-class scores: bootstrap related language pairs and
// potential cognates with normalized Levenshtein distance, re-align and
// re-count for a fixed number of rounds, and tune (gap_open, gap_extend,
// theta) by Nelder-Mead on the mean distance between related languages.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lexiphylo/align.hpp"
#include "lexiphylo/corpus.hpp"
#include "lexiphylo/nelder_mead.hpp"

namespace lexiphylo {

struct TrainingConfig {
    double ldn_related_threshold = 0.7;
    int refine_iterations = 10;
    double gap_open = -2.330;
    double gap_extend = -1.276;
    double theta = 4.401;  // minimum alignment score for a pair to be counted
    std::uint64_t seed = 1;
    double smoothing = 1.0;  // pseudo-count per sound-class pair
};

struct ProbablyRelatedPairs {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // doculect indices, i < j
};

struct PotentialCognate {
    std::size_t doculect_a = 0;
    std::size_t doculect_b = 0;
    std::size_t concept_idx = 0;
    Form a;
    Form b;
};

struct PotentialCognates {
    std::vector<PotentialCognate> items;
};

// Symmetric aligned-pair counts; each non-gap column (a,b) adds one to
// (a,b) and one to (b,a).
struct PairCounts {
    std::array<double, kAlphabetSize * kAlphabetSize> counts{};
    double total = 0.0;

    void add_column(Symbol a, Symbol b);
};

ProbablyRelatedPairs find_probably_related(const Corpus& corpus, double threshold = 0.7);
PotentialCognates find_potential_cognates(const Corpus& corpus, const ProbablyRelatedPairs& related);

// PMI(a,b) = log(s(a,b) / (q(a) q(b))) with s and q additively smoothed.
PmiModel pmi_from_counts(const PairCounts& counts, const Corpus& corpus, double smoothing,
                         double gap_open, double gap_extend);

PmiModel initial_pmi(const Corpus& corpus, const PotentialCognates& cognates,
                     const TrainingConfig& config = {});
PmiModel refine_pmi(const Corpus& corpus, const PotentialCognates& cognates, const PmiModel& model0,
                    const TrainingConfig& config = {});

// Mean PMI distance over the related pairs after initial + refine with the
// given hyperparameters.
double target_function(const Corpus& corpus, const ProbablyRelatedPairs& related,
                       const PotentialCognates& cognates, double gap_open, double gap_extend,
                       double theta, const TrainingConfig& config = {});
double target_function(const Corpus& corpus, const ProbablyRelatedPairs& related, double gap_open,
                       double gap_extend, double theta, const TrainingConfig& config = {});

struct Hyperparameters {
    double gap_open = -2.330;
    double gap_extend = -1.276;
    double theta = 4.401;
};

struct HyperparameterSearch {
    Hyperparameters best;
    double target = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct SearchOptions {
    NelderMeadOptions simplex;
    bool require_convergence = false;  // throw MaxEvaluationsExceeded when the budget runs out
};

// Generic form: minimizes any objective over (gap_open, gap_extend, theta).
HyperparameterSearch optimize_hyperparameters(const Objective& objective, const Hyperparameters& init,
                                              std::uint64_t seed, const SearchOptions& options = {});
HyperparameterSearch optimize_hyperparameters(const Corpus& corpus, const ProbablyRelatedPairs& related,
                                              const Hyperparameters& init, std::uint64_t seed,
                                              const TrainingConfig& config = {},
                                              const SearchOptions& options = {});

struct TrainingReport {
    PmiModel model;
    std::size_t related_pairs = 0;
    std::size_t potential_cognates = 0;
    std::optional<HyperparameterSearch> search;
};

// find_probably_related -> find_potential_cognates -> [optimize] -> initial -> refine.
TrainingReport train_pmi(const Corpus& corpus, const TrainingConfig& config, bool optimize = false,
                         const SearchOptions& options = {});

}  // namespace lexiphylo
