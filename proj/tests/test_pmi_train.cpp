#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/pmi_train.hpp"
#include "lexiphylo/synth.hpp"

using namespace lexiphylo;
using fixture::code;
using fixture::code_of;

namespace {

const SynthData& sample() {
    static const SynthData data = [] {
        SynthOptions o;
        o.families = 2;
        o.doculects_per_family = 8;
        return synthesize(o, 42);
    }();
    return data;
}

}  // namespace

TEST_CASE("PMI from counts follows the smoothed definition") {
    const auto corpus = fixture::english();
    PairCounts counts;
    const auto sym = [](char c) { return *SoundClassAlphabet::index_of(c); };
    counts.add_column(sym('d'), sym('d'));
    counts.add_column(sym('a'), sym('u'));
    counts.add_column(sym('a'), sym('u'));
    CHECK(counts.total == 6.0);
    const auto m = pmi_from_counts(counts, corpus, 1.0, -2.0, -1.0);
    // 15 symbols in the two lists
    std::array<double, kAlphabetSize> n{};
    for (const char* w : {"hund", "treow", "dag", "tri"})
        for (const char* p = w; *p; ++p) n[sym(*p)] += 1;
    auto q = [&](char c) { return (n[sym(c)] + 1.0) / (15.0 + 41.0); };
    auto s = [&](double count) { return (count + 1.0) / (6.0 + 41.0 * 41.0); };
    CHECK(m.score(sym('d'), sym('d')) == doctest::Approx(std::log(s(2) / (q('d') * q('d')))));
    CHECK(m.score(sym('a'), sym('u')) == doctest::Approx(std::log(s(2) / (q('a') * q('u')))));
    CHECK(m.score(sym('u'), sym('a')) == m.score(sym('a'), sym('u')));
    CHECK(m.score(sym('p'), sym('k')) == doctest::Approx(std::log(s(0) / (q('p') * q('k')))));
    CHECK(m.gap_open == -2.0);
    CHECK(m.gap_extend == -1.0);
    // a frequent correspondence outranks an unseen pair
    CHECK(m.score(sym('a'), sym('u')) > m.score(sym('a'), sym('p')));
}

TEST_CASE("probably related pairs are those under the LDN threshold") {
    const auto& data = sample();
    const auto related = find_probably_related(data.corpus, 0.7);
    const auto d = ldn_distance_matrix(data.corpus);
    std::size_t want = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) want += !d.missing(i, j) && d.at(i, j) <= 0.7;
    CHECK(related.pairs.size() == want);
    for (auto [i, j] : related.pairs) CHECK(i < j);
    CHECK(code_of([&] { find_probably_related(data.corpus, 0.0); }) == code(ErrorCode::InvalidArgument));
}

TEST_CASE("potential cognates minimize LDN per concept") {
    const auto& data = sample();
    const auto related = find_probably_related(data.corpus);
    const auto cog = find_potential_cognates(data.corpus, related);
    REQUIRE_FALSE(cog.items.empty());
    for (const auto& item : cog.items) {
        const auto& la = data.corpus.doculects[item.doculect_a];
        const auto& lb = data.corpus.doculects[item.doculect_b];
        const double got = ldn(item.a, item.b);
        for (const auto& x : la.entries[item.concept_idx])
            for (const auto& y : lb.entries[item.concept_idx]) CHECK(got <= ldn(x, y));
    }
}

TEST_CASE("training is deterministic and thread independent") {
    const auto& data = sample();
    TrainingConfig cfg;
    set_thread_count(1);
    const auto a = train_pmi(data.corpus, cfg);
    set_thread_count(3);
    const auto b = train_pmi(data.corpus, cfg);
    set_thread_count(0);
    CHECK(a.model.scores == b.model.scores);
    CHECK(a.related_pairs > 0);
    CHECK(a.potential_cognates > 0);
    CHECK(a.model.gap_open == cfg.gap_open);
    // learned scores reward identity over mismatch on average
    double diag = 0, off = 0;
    for (std::size_t x = 0; x < kAlphabetSize; ++x)
        for (std::size_t y = 0; y < kAlphabetSize; ++y)
            (x == y ? diag : off) += a.model.score(static_cast<Symbol>(x), static_cast<Symbol>(y));
    CHECK(diag / 41 > off / (41 * 40));
}

TEST_CASE("theta above every score empties the refinement set") {
    const auto& data = sample();
    TrainingConfig cfg;
    cfg.theta = 1e9;
    CHECK(code_of([&] { train_pmi(data.corpus, cfg); }) == code(ErrorCode::NoPairsAboveTheta));
}

TEST_CASE("unrelated corpus has nothing to align") {
    std::istringstream in(fixture::corpus_header() + "A,A,X,X,,,I,pa\nB,B,Y,Y,,,you,ti\n");
    const auto c = read_corpus(in);
    CHECK(code_of([&] { train_pmi(c, TrainingConfig{}); }) == code(ErrorCode::NoAlignedPairs));
}

TEST_CASE("hyperparameter search") {
    SUBCASE("generic objective") {
        const Objective f = [](std::span<const double> x) {
            return std::pow(x[0] + 2.0, 2) + std::pow(x[1] + 1.0, 2) + std::pow(x[2] - 4.0, 2);
        };
        SearchOptions o;
        o.simplex.max_evaluations = 1000;
        const auto r = optimize_hyperparameters(f, Hyperparameters{}, 1, o);
        CHECK(r.best.gap_open == doctest::Approx(-2.0).epsilon(1e-2));
        CHECK(r.best.gap_extend == doctest::Approx(-1.0).epsilon(1e-2));
        CHECK(r.best.theta == doctest::Approx(4.0).epsilon(1e-2));
        CHECK(r.converged);
    }
    SUBCASE("budget exhaustion only fails on request") {
        const Objective f = [](std::span<const double> x) { return std::sin(50 * x[0]) + x[1] * x[1] + x[2]; };
        SearchOptions o;
        o.simplex.max_evaluations = 10;
        o.simplex.xtol = 0.0;
        CHECK_FALSE(optimize_hyperparameters(f, Hyperparameters{}, 1, o).converged);
        o.require_convergence = true;
        CHECK(code_of([&] { optimize_hyperparameters(f, Hyperparameters{}, 1, o); }) ==
              code(ErrorCode::MaxEvaluationsExceeded));
    }
    SUBCASE("corpus objective never gets worse than the start") {
        const auto& data = sample();
        const auto related = find_probably_related(data.corpus);
        TrainingConfig cfg;
        cfg.refine_iterations = 2;
        SearchOptions o;
        o.simplex.max_evaluations = 12;
        const auto r = optimize_hyperparameters(data.corpus, related, Hyperparameters{}, 1, cfg, o);
        const double start = target_function(data.corpus, related, -2.330, -1.276, 4.401, cfg);
        CHECK(r.target <= start);
        CHECK(r.evaluations <= 12);
    }
}
