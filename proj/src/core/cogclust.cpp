#include "lexiphylo/cogclust.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "lexiphylo/csv.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/rng.hpp"

namespace lexiphylo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxDistance = 1.0 - 1e-9;

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}
}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "pmi_similarity",     "calibrated_p",          "word_similarity",
        "language_distance",  "language_log_distance", "avg_word_length",
        "concept_language_correlation"};
    return names;
}

std::string mask_to_string(FeatureMask mask) {
    std::string s;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (mask & (1u << i)) {
            if (!s.empty()) s += '+';
            s += "f" + std::to_string(i + 1);
        }
    return s;
}

std::vector<WordPair> synonymous_pairs(const Corpus& corpus, std::size_t c) {
    std::vector<WordPair> pairs;
    const auto& ds = corpus.doculects;
    for (std::size_t a = 0; a < ds.size(); ++a) {
        if (!ds[a].has(c)) continue;
        for (std::size_t b = a + 1; b < ds.size(); ++b) {
            if (!ds[b].has(c)) continue;
            for (std::size_t i = 0; i < ds[a].entries[c].size(); ++i)
                for (std::size_t j = 0; j < ds[b].entries[c].size(); ++j) pairs.push_back({a, b, c, i, j});
        }
    }
    return pairs;
}

FeatureContext::FeatureContext(const Corpus& corpus, const PmiModel& model, const DistanceMatrix& dmatrix)
    : corpus_(corpus), model_(model), n_(corpus.doculects.size()) {
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    dindex_.assign(n_, npos);
    for (std::size_t i = 0; i < n_; ++i)
        if (auto k = dmatrix.index_of(corpus.doculects[i].id)) dindex_[i] = *k;
    distance_.assign(n_ * n_, kNaN);
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b) {
            if (dindex_[a] == npos || dindex_[b] == npos) continue;
            if (!dmatrix.missing(dindex_[a], dindex_[b])) distance_[a * n_ + b] = dmatrix.at(dindex_[a], dindex_[b]);
        }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = a + 1; b < n_; ++b) pairs.emplace_back(a, b);
    panels_.resize(n_ * n_);
    const auto simfn = pmi_similarity_fn(model_);
    parallel_for(pairs.size(), [&](std::size_t k) {
        const auto [a, b] = pairs[k];
        panels_[a * n_ + b] =
            calibration_panel(concept_similarities(corpus_.doculects[a], corpus_.doculects[b], simfn));
    });

    const std::size_t nc = corpus.concepts.size();
    avg_length_.assign(nc, 0.0);
    correlation_.assign(nc, 0.0);
    parallel_for(nc, [&](std::size_t c) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& d : corpus_.doculects)
            if (d.has(c))
                for (const auto& f : d.entries[c]) {
                    total += static_cast<double>(f.size());
                    ++count;
                }
        avg_length_[c] = count ? total / static_cast<double>(count) : 0.0;
        std::vector<double> f3, f4;
        for (const auto& p : synonymous_pairs(corpus_, c)) {
            if (std::isnan(distance_[p.doculect_a * n_ + p.doculect_b])) continue;
            const auto f = base_features(p);
            f3.push_back(f[kWordSimilarity]);
            f4.push_back(f[kLanguageDistance]);
        }
        correlation_[c] = pearson(f3, f4);
    });
}

const std::vector<double>& FeatureContext::panel(std::size_t a, std::size_t b) const {
    return a < b ? panels_[a * n_ + b] : panels_[b * n_ + a];
}

FeatureVector FeatureContext::base_features(const WordPair& p) const {
    if (p.doculect_a >= n_ || p.doculect_b >= n_ || p.doculect_a == p.doculect_b)
        fail(ErrorCode::InvalidArgument, "word pair must join two different doculects");
    const auto& la = corpus_.doculects[p.doculect_a];
    const auto& lb = corpus_.doculects[p.doculect_b];
    if (!la.has(p.concept_idx) || !lb.has(p.concept_idx) || p.form_a >= la.entries[p.concept_idx].size() ||
        p.form_b >= lb.entries[p.concept_idx].size())
        fail(ErrorCode::InvalidArgument, "word pair refers to a missing form");
    const double d = distance_[p.doculect_a * n_ + p.doculect_b];
    if (std::isnan(d)) fail(ErrorCode::MissingDistance, "no distance for " + la.id + " / " + lb.id);

    FeatureVector f{};
    f[kPmiSimilarity] =
        pmi_similarity(la.entries[p.concept_idx][p.form_a], lb.entries[p.concept_idx][p.form_b], model_);
    f[kCalibratedP] = panel_p_value(panel(p.doculect_a, p.doculect_b), f[kPmiSimilarity]);
    f[kWordSimilarity] = -std::log(f[kCalibratedP]);
    f[kLanguageDistance] = d;
    f[kLanguageLogDistance] = -std::log(1.0 - std::min(d, kMaxDistance));
    f[kAverageWordLength] = avg_length_[p.concept_idx];
    return f;
}

FeatureVector FeatureContext::features(const WordPair& pair) const {
    auto f = base_features(pair);
    f[kConceptLanguageCorrelation] = correlation_[pair.concept_idx];
    return f;
}

std::vector<int> label_propagation(std::size_t n, std::span<const double> probs, double threshold,
                                   std::uint64_t seed, std::size_t max_sweeps) {
    if (probs.size() != n * n) fail(ErrorCode::SizeMismatch, "probability matrix must be n*n");
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && probs[i * n + j] >= threshold) adj[i].push_back(j);
    std::vector<int> label(n);
    std::iota(label.begin(), label.end(), 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::vector<int> count(n, 0);
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        rng.shuffle(order);
        bool changed = false;
        for (std::size_t v : order) {
            if (adj[v].empty()) continue;
            for (std::size_t u : adj[v]) ++count[static_cast<std::size_t>(label[u])];
            int best = -1, best_count = 0;
            for (std::size_t u : adj[v]) {
                const int l = label[u], k = count[static_cast<std::size_t>(l)];
                if (k > best_count || (k == best_count && l < best)) {
                    best = l;
                    best_count = k;
                }
            }
            for (std::size_t u : adj[v]) count[static_cast<std::size_t>(label[u])] = 0;
            if (best != label[v]) {
                label[v] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::unordered_map<int, int> renumber;
    for (auto& l : label) {
        auto it = renumber.try_emplace(l, static_cast<int>(renumber.size())).first;
        l = it->second;
    }
    return label;
}

BCubed bcubed_f(std::span<const long> gold, std::span<const long> predicted) {
    if (gold.size() != predicted.size()) fail(ErrorCode::ItemSetMismatch, "partitions cover different items");
    if (gold.empty()) fail(ErrorCode::EmptyList, "no items to score");
    std::map<long, double> ng, np;
    std::map<std::pair<long, long>, double> both;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        ng[gold[i]] += 1;
        np[predicted[i]] += 1;
        both[{gold[i], predicted[i]}] += 1;
    }
    double p = 0.0, r = 0.0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const double k = both[{gold[i], predicted[i]}];
        p += k / np[predicted[i]];
        r += k / ng[gold[i]];
    }
    const double n = static_cast<double>(gold.size());
    BCubed out{p / n, r / n, 0.0};
    out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

BCubed bcubed_f(const std::map<std::string, std::string>& gold,
                const std::map<std::string, std::string>& predicted) {
    if (gold.size() != predicted.size()) fail(ErrorCode::ItemSetMismatch, "partitions cover different items");
    std::map<std::string, long> gid, pid;
    std::vector<long> g, p;
    auto it = predicted.begin();
    for (const auto& [item, label] : gold) {
        if (it->first != item) fail(ErrorCode::ItemSetMismatch, "item " + item + " not in both partitions");
        g.push_back(gid.try_emplace(label, static_cast<long>(gid.size())).first->second);
        p.push_back(pid.try_emplace(it->second, static_cast<long>(pid.size())).first->second);
        ++it;
    }
    return bcubed_f(g, p);
}

CognatePartition cluster_corpus(const FeatureContext& context, const ClassifierModel& classifier,
                                const ClusterOptions& options) {
    const Corpus& corpus = context.corpus();
    const std::size_t nc = corpus.concepts.size();
    struct Node {
        std::size_t doculect, synonym;
    };
    std::vector<std::vector<Node>> nodes(nc);
    std::vector<std::vector<int>> labels(nc);
    parallel_for(nc, [&](std::size_t c) {
        for (std::size_t d = 0; d < corpus.doculects.size(); ++d)
            if (corpus.doculects[d].has(c))
                for (std::size_t s = 0; s < corpus.doculects[d].entries[c].size(); ++s) nodes[c].push_back({d, s});
        const std::size_t n = nodes[c].size();
        if (n == 0) return;
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> position;
        for (std::size_t i = 0; i < n; ++i) position[{nodes[c][i].doculect, nodes[c][i].synonym}] = i;
        std::vector<double> probs(n * n, 0.0);
        for (const auto& p : synonymous_pairs(corpus, c)) {
            const std::size_t i = position[{p.doculect_a, p.form_a}];
            const std::size_t j = position[{p.doculect_b, p.form_b}];
            probs[i * n + j] = probs[j * n + i] = predict_proba(classifier, context.features(p));
        }
        labels[c] = label_propagation(n, probs, options.threshold, derive_seed(options.seed, c));
    });

    struct Row {
        std::size_t doculect, concept_idx, synonym;
        int label;
    };
    std::vector<Row> rows;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t i = 0; i < nodes[c].size(); ++i)
            rows.push_back({nodes[c][i].doculect, c, nodes[c][i].synonym, labels[c][i]});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.doculect, a.concept_idx, a.synonym) < std::tie(b.doculect, b.concept_idx, b.synonym);
    });
    CognatePartition out;
    for (const auto& r : rows) {
        const auto& d = corpus.doculects[r.doculect];
        out.items.push_back({d.id, corpus.concepts[r.concept_idx], d.entries[r.concept_idx][r.synonym].raw,
                             corpus.concepts[r.concept_idx] + "_" + std::to_string(r.label + 1)});
    }
    return out;
}

CognatePartition cluster_corpus(const Corpus& corpus, const PmiModel& model, const DistanceMatrix& dmatrix,
                                const ClassifierModel& classifier, const ClusterOptions& options) {
    const FeatureContext context(corpus, model, dmatrix);
    return cluster_corpus(context, classifier, options);
}

namespace {
const csv::Row kCognateHeader = {"doculect_id", "concept", "transcription", "cognate_class"};
}

void write_cognates(const CognatePartition& partition, std::ostream& out) {
    csv::write_row(out, kCognateHeader);
    for (const auto& item : partition.items)
        csv::write_row(out, {item.doculect_id, item.concept_name, item.transcription, item.cognate_class});
}

CognatePartition read_cognates(std::istream& in) {
    csv::Reader reader(in);
    csv::Row row;
    if (!reader.next(row)) fail(ErrorCode::ParseError, "cognate file is empty");
    if (!row.empty() && row[0].rfind("\xEF\xBB\xBF", 0) == 0) row[0].erase(0, 3);
    if (row != kCognateHeader) fail(ErrorCode::ParseError, "line 1: unexpected cognate header");
    CognatePartition out;
    while (reader.next(row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 4)
            fail(ErrorCode::ParseError, "line " + std::to_string(reader.line()) + ": expected 4 fields");
        out.items.push_back({row[0], row[1], row[2], row[3]});
    }
    return out;
}

void save_cognates(const CognatePartition& partition, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    write_cognates(partition, out);
    if (!out) fail(ErrorCode::Io, "write failed: " + path);
}

CognatePartition load_cognates(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return read_cognates(in);
}

GoldIndex index_gold(const GoldStandard& gold) {
    GoldIndex g;
    g.corpus = corpus_from_gold(gold);
    const std::size_t n = g.corpus.doculects.size(), nc = g.corpus.concepts.size();
    g.classes.assign(n, std::vector<std::vector<long>>(nc));
    std::map<std::tuple<std::string, std::string, std::string>, long> class_id;
    for (const auto& r : gold.records) {
        const std::size_t d = *g.corpus.doculect_index(r.doculect_id);
        const std::size_t c = *g.corpus.concept_index(r.concept_name);
        const long id =
            class_id.try_emplace({r.family, r.concept_name, r.cognate_class}, static_cast<long>(class_id.size()))
                .first->second;
        g.classes[d][c].push_back(id);
    }

    std::set<std::string> fams;
    for (const auto& d : g.corpus.doculects) fams.insert(d.family);
    g.families.assign(fams.begin(), fams.end());
    for (const auto& d : g.corpus.doculects)
        g.family_of.push_back(static_cast<std::size_t>(
            std::lower_bound(g.families.begin(), g.families.end(), d.family) - g.families.begin()));

    // The same data filed under two family names would leak test data into training.
    std::vector<std::vector<std::string>> signature(g.families.size());
    for (std::size_t d = 0; d < n; ++d) {
        std::string s;
        for (std::size_t c = 0; c < nc; ++c)
            for (const auto& f : g.corpus.doculects[d].entries[c]) s += std::to_string(c) + ':' + f.raw + ';';
        signature[g.family_of[d]].push_back(std::move(s));
    }
    std::map<std::vector<std::string>, std::size_t> seen;
    for (std::size_t f = 0; f < signature.size(); ++f) {
        std::sort(signature[f].begin(), signature[f].end());
        auto [it, fresh] = seen.try_emplace(signature[f], f);
        if (!fresh)
            fail(ErrorCode::InvalidArgument,
                 "families " + g.families[it->second] + " and " + g.families[f] + " hold identical data");
    }
    return g;
}

SelectionData selection_data(const GoldIndex& gold, const FeatureContext& context) {
    const Corpus& corpus = gold.corpus;
    SelectionData data;
    data.families = gold.families.size();
    data.concepts.resize(corpus.concepts.size());
    parallel_for(corpus.concepts.size(), [&](std::size_t c) {
        auto& block = data.concepts[c];
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> position;
        for (std::size_t d = 0; d < corpus.doculects.size(); ++d)
            for (std::size_t s = 0; s < gold.classes[d][c].size(); ++s) {
                position[{d, s}] = block.items.size();
                block.items.push_back({gold.family_of[d], gold.classes[d][c][s]});
            }
        for (const auto& p : synonymous_pairs(corpus, c)) {
            block.pairs.emplace_back(position[{p.doculect_a, p.form_a}], position[{p.doculect_b, p.form_b}]);
            block.features.push_back(context.features(p));
        }
    });
    return data;
}

namespace {

struct PairRef {
    std::size_t concept_idx, pair;
};

std::vector<LabeledPair> sample_pairs(const SelectionData& data, const std::vector<bool>& use_family,
                                      std::size_t max_pairs, Rng& rng) {
    std::vector<PairRef> candidates;
    for (std::size_t c = 0; c < data.concepts.size(); ++c) {
        const auto& b = data.concepts[c];
        for (std::size_t k = 0; k < b.pairs.size(); ++k)
            if (use_family[b.items[b.pairs[k].first].family] && use_family[b.items[b.pairs[k].second].family])
                candidates.push_back({c, k});
    }
    const std::size_t take = std::min(max_pairs, candidates.size());
    for (std::size_t i = 0; i < take; ++i)
        std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
    std::vector<LabeledPair> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& b = data.concepts[candidates[i].concept_idx];
        const auto [x, y] = b.pairs[candidates[i].pair];
        out.push_back({b.features[candidates[i].pair], b.items[x].gold_class == b.items[y].gold_class ? 1 : 0});
    }
    return out;
}

double evaluate_split(const SelectionData& data, const std::vector<bool>& test_family,
                      const ClassifierModel& classifier, double threshold, std::uint64_t seed) {
    std::vector<long> gold, predicted;
    for (std::size_t c = 0; c < data.concepts.size(); ++c) {
        const auto& b = data.concepts[c];
        std::vector<std::size_t> local(b.items.size(), SIZE_MAX);
        std::size_t n = 0;
        for (std::size_t i = 0; i < b.items.size(); ++i)
            if (test_family[b.items[i].family]) {
                local[i] = n++;
                gold.push_back(b.items[i].gold_class);
            }
        if (n == 0) continue;
        std::vector<double> probs(n * n, 0.0);
        for (std::size_t k = 0; k < b.pairs.size(); ++k) {
            const std::size_t i = local[b.pairs[k].first], j = local[b.pairs[k].second];
            if (i == SIZE_MAX || j == SIZE_MAX) continue;
            probs[i * n + j] = probs[j * n + i] = predict_proba(classifier, b.features[k]);
        }
        for (int l : label_propagation(n, probs, threshold, derive_seed(seed, c)))
            predicted.push_back(static_cast<long>(c) * 1000000L + l);
    }
    return bcubed_f(gold, predicted).f;
}

}  // namespace

std::vector<SubsetScore> select_features(const SelectionData& data, std::uint64_t seed,
                                         const ModelSelectionOptions& options) {
    if (data.families < 2)
        fail(ErrorCode::InsufficientFamilies, "model selection needs at least two gold families");
    if (options.splits == 0) fail(ErrorCode::InvalidArgument, "splits must be positive");
    std::vector<FeatureMask> masks = options.masks;
    if (masks.empty())
        for (FeatureMask m = 1; m <= kAllFeatures; ++m) masks.push_back(m);
    const std::size_t ntrain = std::clamp<std::size_t>(options.training_families, 1, data.families - 1);

    std::vector<double> total(masks.size(), 0.0);
    for (std::size_t split = 0; split < options.splits; ++split) {
        Rng rng(derive_seed(seed, split));
        std::vector<std::size_t> order(data.families);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<bool> train(data.families, false);
        for (std::size_t i = 0; i < ntrain; ++i) train[order[i]] = true;
        std::vector<bool> test(data.families);
        for (std::size_t f = 0; f < data.families; ++f) test[f] = !train[f];
        const auto sample = sample_pairs(data, train, options.training_pairs, rng);
        const std::uint64_t cluster_seed = derive_seed(seed, "cluster" + std::to_string(split));

        std::vector<double> scores(masks.size());
        parallel_for(masks.size(), [&](std::size_t m) {
            const auto cls = train_classifier(sample, masks[m], seed, options.kind);
            scores[m] = evaluate_split(data, test, cls, options.threshold, cluster_seed);
        });
        for (std::size_t m = 0; m < masks.size(); ++m) total[m] += scores[m];
    }

    std::vector<SubsetScore> ranked;
    for (std::size_t m = 0; m < masks.size(); ++m)
        ranked.push_back({masks[m], total[m] / static_cast<double>(options.splits)});
    std::sort(ranked.begin(), ranked.end(), [](const SubsetScore& a, const SubsetScore& b) {
        if (a.mean_f != b.mean_f) return a.mean_f > b.mean_f;
        const int pa = std::popcount(a.mask), pb = std::popcount(b.mask);
        if (pa != pb) return pa < pb;
        return a.mask < b.mask;
    });
    return ranked;
}

std::vector<SubsetScore> model_selection(const GoldStandard& gold, const PmiModel& model, std::uint64_t seed,
                                         const ModelSelectionOptions& options) {
    const auto index = index_gold(gold);
    if (index.families.size() < 2)
        fail(ErrorCode::InsufficientFamilies, "model selection needs at least two gold families");
    const auto dmatrix = distance_matrix(index.corpus, model);
    const FeatureContext context(index.corpus, model, dmatrix);
    return select_features(selection_data(index, context), seed, options);
}

ClassifierModel train_on_gold(const SelectionData& data, FeatureMask mask, std::uint64_t seed,
                              std::size_t max_pairs, ClassifierKind kind) {
    Rng rng(derive_seed(seed, "train"));
    const auto sample = sample_pairs(data, std::vector<bool>(data.families, true), max_pairs, rng);
    return train_classifier(sample, mask, seed, kind);
}

}  // namespace lexiphylo
