#include "lexiphylo/pmi_train.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "lexiphylo/error.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/parallel.hpp"

namespace lexiphylo {

void PairCounts::add_column(Symbol a, Symbol b) {
    counts[a * kAlphabetSize + b] += 1.0;
    counts[b * kAlphabetSize + a] += 1.0;
    total += 2.0;
}

ProbablyRelatedPairs find_probably_related(const Corpus& corpus, double threshold) {
    if (corpus.doculects.size() < 2)
        fail(ErrorCode::InvalidArgument, "need at least two doculects");
    if (!(threshold > 0.0 && threshold <= 1.0))
        fail(ErrorCode::InvalidArgument, "related threshold must lie in (0, 1]");
    const auto d = ldn_distance_matrix(corpus);
    ProbablyRelatedPairs related;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j)
            if (!d.missing(i, j) && d.at(i, j) <= threshold) related.pairs.emplace_back(i, j);
    return related;
}

PotentialCognates find_potential_cognates(const Corpus& corpus, const ProbablyRelatedPairs& related) {
    std::vector<std::vector<PotentialCognate>> per_pair(related.pairs.size());
    parallel_for(related.pairs.size(), [&](std::size_t k) {
        const auto [i, j] = related.pairs[k];
        const auto& l1 = corpus.doculects[i];
        const auto& l2 = corpus.doculects[j];
        const std::size_t n = std::min(l1.entries.size(), l2.entries.size());
        for (std::size_t c = 0; c < n; ++c) {
            if (!l1.has(c) || !l2.has(c)) continue;
            const Form* best_a = nullptr;
            const Form* best_b = nullptr;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& a : l1.entries[c])
                for (const auto& b : l2.entries[c]) {
                    const double v = ldn(a, b);
                    if (v < best || (v == best && std::tie(a.raw, b.raw) < std::tie(best_a->raw, best_b->raw))) {
                        best = v;
                        best_a = &a;
                        best_b = &b;
                    }
                }
            per_pair[k].push_back({i, j, c, *best_a, *best_b});
        }
    });
    PotentialCognates out;
    for (auto& v : per_pair)
        for (auto& item : v) out.items.push_back(std::move(item));
    return out;
}

PmiModel pmi_from_counts(const PairCounts& counts, const Corpus& corpus, double smoothing,
                         double gap_open, double gap_extend) {
    const auto symbols = symbol_counts(corpus);
    double n_symbols = 0.0;
    for (auto c : symbols) n_symbols += static_cast<double>(c);
    const double k = static_cast<double>(kAlphabetSize);

    std::array<double, kAlphabetSize> q{};
    for (std::size_t a = 0; a < kAlphabetSize; ++a)
        q[a] = (static_cast<double>(symbols[a]) + smoothing) / (n_symbols + k * smoothing);

    PmiModel model;
    model.gap_open = gap_open;
    model.gap_extend = gap_extend;
    model.alphabet = estimate_frequencies(corpus);
    const double denom = counts.total + k * k * smoothing;
    for (std::size_t a = 0; a < kAlphabetSize; ++a)
        for (std::size_t b = 0; b < kAlphabetSize; ++b) {
            const double s = (counts.counts[a * kAlphabetSize + b] + smoothing) / denom;
            model.scores[a * kAlphabetSize + b] =
                s > 0.0 ? std::log(s / (q[a] * q[b])) : -std::numeric_limits<double>::infinity();
        }
    return model;
}

PmiModel initial_pmi(const Corpus& corpus, const PotentialCognates& cognates,
                     const TrainingConfig& config) {
    PairCounts counts;
    for (const auto& item : cognates.items)
        for (const auto& [i, j] : levenshtein_alignment(item.a, item.b))
            if (i >= 0 && j >= 0) counts.add_column(item.a.segments[i], item.b.segments[j]);
    if (counts.total == 0.0) fail(ErrorCode::NoAlignedPairs, "no aligned sound-class pairs");
    return pmi_from_counts(counts, corpus, config.smoothing, config.gap_open, config.gap_extend);
}

PmiModel refine_pmi(const Corpus& corpus, const PotentialCognates& cognates, const PmiModel& model0,
                    const TrainingConfig& config) {
    if (config.refine_iterations < 1)
        fail(ErrorCode::InvalidArgument, "refine_iterations must be >= 1");
    PmiModel model = model0;
    std::vector<Alignment> alignments(cognates.items.size());
    for (int iteration = 1; iteration <= config.refine_iterations; ++iteration) {
        parallel_for(cognates.items.size(), [&](std::size_t k) {
            alignments[k] = align_pmi(cognates.items[k].a, cognates.items[k].b, model);
        });
        PairCounts counts;
        for (const auto& aln : alignments) {
            if (!(aln.score >= config.theta)) continue;
            for (std::size_t col = 0; col < aln.gapped_a.size(); ++col)
                if (aln.gapped_a[col] != Alignment::kGap && aln.gapped_b[col] != Alignment::kGap)
                    counts.add_column(static_cast<Symbol>(aln.gapped_a[col]),
                                      static_cast<Symbol>(aln.gapped_b[col]));
        }
        if (counts.total == 0.0)
            fail(ErrorCode::NoPairsAboveTheta,
                 "iteration " + std::to_string(iteration) + ": no potential cognate scores >= theta");
        model = pmi_from_counts(counts, corpus, config.smoothing, model0.gap_open, model0.gap_extend);
    }
    return model;
}

double target_function(const Corpus& corpus, const ProbablyRelatedPairs& related,
                       const PotentialCognates& cognates, double gap_open, double gap_extend,
                       double theta, const TrainingConfig& config) {
    if (related.pairs.empty()) fail(ErrorCode::InvalidArgument, "no probably related pairs");
    TrainingConfig cfg = config;
    cfg.gap_open = gap_open;
    cfg.gap_extend = gap_extend;
    cfg.theta = theta;
    const PmiModel model = refine_pmi(corpus, cognates, initial_pmi(corpus, cognates, cfg), cfg);
    const auto simfn = pmi_similarity_fn(model);
    std::vector<double> d(related.pairs.size());
    parallel_for(related.pairs.size(), [&](std::size_t k) {
        const auto [i, j] = related.pairs[k];
        d[k] = language_distance(corpus.doculects[i], corpus.doculects[j], simfn);
    });
    double sum = 0.0;
    for (double v : d) sum += v;
    return sum / static_cast<double>(d.size());
}

double target_function(const Corpus& corpus, const ProbablyRelatedPairs& related, double gap_open,
                       double gap_extend, double theta, const TrainingConfig& config) {
    return target_function(corpus, related, find_potential_cognates(corpus, related), gap_open,
                           gap_extend, theta, config);
}

HyperparameterSearch optimize_hyperparameters(const Objective& objective, const Hyperparameters& init,
                                              std::uint64_t /*seed*/, const SearchOptions& options) {
    // The simplex search is fully deterministic; the seed is part of the
    // interface so callers can thread one master seed through every stage.
    const auto r = nelder_mead(objective, {init.gap_open, init.gap_extend, init.theta}, options.simplex);
    if (!r.converged && options.require_convergence)
        fail(ErrorCode::MaxEvaluationsExceeded,
             "no convergence after " + std::to_string(r.evaluations) + " evaluations");
    HyperparameterSearch out;
    out.best = {r.x[0], r.x[1], r.x[2]};
    out.target = r.value;
    out.evaluations = r.evaluations;
    out.converged = r.converged;
    return out;
}

HyperparameterSearch optimize_hyperparameters(const Corpus& corpus, const ProbablyRelatedPairs& related,
                                              const Hyperparameters& init, std::uint64_t seed,
                                              const TrainingConfig& config,
                                              const SearchOptions& options) {
    const auto cognates = find_potential_cognates(corpus, related);
    const Objective objective = [&](std::span<const double> x) {
        try {
            return target_function(corpus, related, cognates, x[0], x[1], x[2], config);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::NoPairsAboveTheta) return std::numeric_limits<double>::infinity();
            throw;
        }
    };
    return optimize_hyperparameters(objective, init, seed, options);
}

TrainingReport train_pmi(const Corpus& corpus, const TrainingConfig& config, bool optimize,
                         const SearchOptions& options) {
    TrainingReport report;
    const auto related = find_probably_related(corpus, config.ldn_related_threshold);
    if (related.pairs.empty())
        fail(ErrorCode::NoAlignedPairs, "no probably related doculect pairs at threshold " +
                                            std::to_string(config.ldn_related_threshold));
    const auto cognates = find_potential_cognates(corpus, related);
    report.related_pairs = related.pairs.size();
    report.potential_cognates = cognates.items.size();

    TrainingConfig cfg = config;
    if (optimize) {
        report.search = optimize_hyperparameters(
            corpus, related, {config.gap_open, config.gap_extend, config.theta}, config.seed, config,
            options);
        cfg.gap_open = report.search->best.gap_open;
        cfg.gap_extend = report.search->best.gap_extend;
        cfg.theta = report.search->best.theta;
    }
    report.model = refine_pmi(corpus, cognates, initial_pmi(corpus, cognates, cfg), cfg);
    return report;
}

}  // namespace lexiphylo
