#pragma once
// Cognate clustering: seven pair features, a probabilistic classifier (RBF
// SVM with Platt scaling, or quadratic logistic regression), label
// propagation over the >= threshold graph of each concept, B-cubed scoring
// and feature-subset selection by cross-validation over gold families.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lexiphylo/align.hpp"
#include "lexiphylo/corpus.hpp"
#include "lexiphylo/lexdist.hpp"

namespace lexiphylo {

constexpr std::size_t kFeatureCount = 7;
using FeatureVector = std::array<double, kFeatureCount>;

enum Feature : std::size_t {
    kPmiSimilarity = 0,
    kCalibratedP,
    kWordSimilarity,          // -log p
    kLanguageDistance,        // d
    kLanguageLogDistance,     // -log(1 - d)
    kAverageWordLength,
    kConceptLanguageCorrelation,
};

const std::array<std::string, kFeatureCount>& feature_names();

// Bit i set = feature i used. 1..127.
using FeatureMask = unsigned;
constexpr FeatureMask kAllFeatures = (1u << kFeatureCount) - 1;
constexpr FeatureMask kSelectedFeatures = (1u << kWordSimilarity) | (1u << kLanguageLogDistance);
std::string mask_to_string(FeatureMask mask);  // "f3+f5"

// Two synonymous forms: entries[concept_idx][form_a] of doculect_a, etc.
struct WordPair {
    std::size_t doculect_a = 0;
    std::size_t doculect_b = 0;
    std::size_t concept_idx = 0;
    std::size_t form_a = 0;
    std::size_t form_b = 0;
};

// All cross-doculect synonymous pairs of one concept, doculect order then
// synonym order.
std::vector<WordPair> synonymous_pairs(const Corpus& corpus, std::size_t c);

// Precomputes, for every doculect pair, the sorted calibration panel, and
// per concept the average word length and f3/f4 correlation. The corpus,
// model and matrix must outlive the context.
class FeatureContext {
public:
    FeatureContext(const Corpus& corpus, const PmiModel& model, const DistanceMatrix& dmatrix);

    FeatureVector features(const WordPair& pair) const;
    double average_word_length(std::size_t c) const { return avg_length_[c]; }
    double concept_correlation(std::size_t c) const { return correlation_[c]; }
    const Corpus& corpus() const noexcept { return corpus_; }

private:
    FeatureVector base_features(const WordPair& pair) const;  // f7 left at 0
    const std::vector<double>& panel(std::size_t a, std::size_t b) const;

    const Corpus& corpus_;
    const PmiModel& model_;
    std::size_t n_ = 0;
    std::vector<std::size_t> dindex_;  // corpus doculect -> matrix row
    std::vector<double> distance_;     // n*n, NaN = missing
    std::vector<std::vector<double>> panels_;  // upper triangle a < b
    std::vector<double> avg_length_;
    std::vector<double> correlation_;
};

struct LabeledPair {
    FeatureVector features{};
    int label = 0;  // 1 cognate, 0 not
};

enum class ClassifierKind { Svm, Logistic };

struct SvmOptions {
    double c = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iterations = 100000;
};

struct ClassifierModel {
    ClassifierKind kind = ClassifierKind::Svm;
    FeatureMask mask = kSelectedFeatures;
    std::vector<double> mean;   // standardization over selected features
    std::vector<double> scale;
    // SVM
    double gamma = 1.0;
    std::vector<std::vector<double>> support;  // standardized support vectors
    std::vector<double> coef;                  // alpha_i * y_i
    double bias = 0.0;                         // decision = sum coef K + bias
    double platt_a = 0.0;
    double platt_b = 0.0;
    // diagnostics of the last solve
    std::size_t iterations = 0;
    double kkt_gap = 0.0;
    // Logistic: weights over [1, x_i..., x_i*x_j (i <= j)...]
    std::vector<double> weights;

    std::vector<double> select(const FeatureVector& f) const;  // standardized subset
    double decision(const FeatureVector& f) const;
};

ClassifierModel train_classifier(std::span<const LabeledPair> data, FeatureMask mask,
                                 std::uint64_t seed, ClassifierKind kind = ClassifierKind::Svm,
                                 const SvmOptions& options = {});
double predict_proba(const ClassifierModel& model, const FeatureVector& features);
double platt_probability(double decision, double a, double b);
// Lin/Lin/Weng Newton fit of 1 / (1 + exp(A f + B)) with Platt's target smoothing.
std::pair<double, double> fit_platt(std::span<const double> decisions, std::span<const int> labels);

void write_classifier(const ClassifierModel& model, std::ostream& out);
ClassifierModel read_classifier(std::istream& in);

// probs is n*n symmetric. Returns labels 0..k-1 numbered by first occurrence.
std::vector<int> label_propagation(std::size_t n, std::span<const double> probs,
                                   double threshold = 0.25, std::uint64_t seed = 1,
                                   std::size_t max_sweeps = 1000);

struct BCubed {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

// Parallel label vectors over the same items.
BCubed bcubed_f(std::span<const long> gold, std::span<const long> predicted);
// Keyed form; throws ItemSetMismatch when the key sets differ.
BCubed bcubed_f(const std::map<std::string, std::string>& gold,
                const std::map<std::string, std::string>& predicted);

struct CognateAssignment {
    std::string doculect_id;
    std::string concept_name;
    std::string transcription;
    std::string cognate_class;
};

struct CognatePartition {
    std::vector<CognateAssignment> items;
};

struct ClusterOptions {
    double threshold = 0.25;
    std::uint64_t seed = 1;
};

CognatePartition cluster_corpus(const FeatureContext& context, const ClassifierModel& classifier,
                                const ClusterOptions& options = {});
CognatePartition cluster_corpus(const Corpus& corpus, const PmiModel& model,
                                const DistanceMatrix& dmatrix, const ClassifierModel& classifier,
                                const ClusterOptions& options = {});

void write_cognates(const CognatePartition& partition, std::ostream& out);
CognatePartition read_cognates(std::istream& in);
void save_cognates(const CognatePartition& partition, const std::string& path);
CognatePartition load_cognates(const std::string& path);

// Gold data lined up with corpus_from_gold: per doculect, per concept, per
// synonym, a class id unique across families and concepts.
struct GoldIndex {
    Corpus corpus;
    std::vector<std::vector<std::vector<long>>> classes;
    std::vector<std::string> families;          // sorted
    std::vector<std::size_t> family_of;         // per doculect, index into families
};
GoldIndex index_gold(const GoldStandard& gold);

struct SubsetScore {
    FeatureMask mask = 0;
    double mean_f = 0.0;
};

struct ModelSelectionOptions {
    std::size_t splits = 10;
    std::size_t training_families = 6;  // capped at families - 1
    std::size_t training_pairs = 7000;
    std::vector<FeatureMask> masks;     // empty = all 127
    ClassifierKind kind = ClassifierKind::Svm;
    double threshold = 0.25;
};

// Precomputed features and gold labels per concept, for selection without
// a corpus-backed context.
struct SelectionData {
    std::size_t families = 0;
    struct Item {
        std::size_t family;
        long gold_class;
    };
    struct ConceptBlock {
        std::vector<Item> items;
        // pair list over items (i < j) with features; cognacy derived from gold_class
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        std::vector<FeatureVector> features;
    };
    std::vector<ConceptBlock> concepts;
};

SelectionData selection_data(const GoldIndex& gold, const FeatureContext& context);
std::vector<SubsetScore> select_features(const SelectionData& data, std::uint64_t seed,
                                         const ModelSelectionOptions& options = {});
// Ranked best first: mean F descending, then fewer features, then smaller mask.
std::vector<SubsetScore> model_selection(const GoldStandard& gold, const PmiModel& model,
                                         std::uint64_t seed,
                                         const ModelSelectionOptions& options = {});

// Classifier on a sample of up to max_pairs gold pairs from all families.
ClassifierModel train_on_gold(const SelectionData& data, FeatureMask mask, std::uint64_t seed,
                              std::size_t max_pairs = 7000, ClassifierKind kind = ClassifierKind::Svm);

}  // namespace lexiphylo
