#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/synth.hpp"
#include "oracles.hpp"

using namespace lexiphylo;
using fixture::code;
using fixture::code_of;

namespace {

ConceptSimilarityTable random_table(Rng& rng, std::size_t n, double missing, bool ties) {
    ConceptSimilarityTable t;
    t.concepts = n;
    t.values.resize(n * n);
    for (auto& v : t.values) {
        v = ties ? static_cast<double>(rng.below(8)) : rng.uniform(-5, 10);
        if (rng.bernoulli(missing)) v = std::nan("");
    }
    return t;
}

Doculect doculect(const std::string& id, const std::vector<std::string>& words) {
    Doculect d;
    d.id = id;
    d.entries.resize(40);
    for (std::size_t c = 0; c < words.size(); ++c)
        if (!words[c].empty()) d.entries[c].push_back(strip_diacritics(words[c]));
    return d;
}

}  // namespace

TEST_CASE("extreme Z values") {
    CHECK(std::abs(kZMax - 40.18) <= 0.01);
    CHECK(std::abs(kZMin + 6.32) <= 0.01);
    CHECK(distance_from_z(kZMax) == 0.0);
    CHECK(distance_from_z(kZMin) == doctest::Approx(1.0));
}

TEST_CASE("p-values equal a direct count") {
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
        const auto t = random_table(rng, 40, k % 3 ? 0.05 : 0.0, k % 2 == 0);
        const auto all = p_values(t);
        for (std::size_t c = 0; c < 40; ++c) {
            if (!t.defined(c, c)) {
                CHECK(std::isnan(all[c]));
                CHECK(code_of([&] { p_value(t, c); }) == code(ErrorCode::UndefinedConcept));
                continue;
            }
            const double want = oracle::p_value_count(t, c);
            CHECK(p_value(t, c) == want);
            CHECK(all[c] == want);
        }
    }
}

TEST_CASE("strict maximum gives 1/1561") {
    Rng rng(4);
    auto t = random_table(rng, 40, 0.0, false);
    t.values[7 * 40 + 7] = 100.0;
    CHECK(p_value(t, 7) == 1.0 / 1561.0);
}

TEST_CASE("-log of uniform(0,1] is standard exponential") {
    Rng rng(1);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = -std::log(rng.uniform_pos());
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n, var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 1.0) <= 3.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(8.0 / n));  // Var(X^2)=20, Var(s^2)~8/n
}

TEST_CASE("z score and distance") {
    const std::vector<double> p(40, 1.0 / 1561.0);
    CHECK(z_score(p) == doctest::Approx(kZMax));
    CHECK(code_of([] { z_score({}); }) == code(ErrorCode::EmptyList));
    const std::vector<double> half = {0.5, 0.25};
    CHECK(z_score(half) == doctest::Approx((std::log(2.0) + std::log(4.0) - 2.0) / std::sqrt(2.0)));
}

TEST_CASE("identical word lists have distance 0") {
    std::vector<std::string> words;
    const char* syl[] = {"pa", "ti", "ku", "me", "lo", "sa", "ni", "ru"};
    for (int c = 0; c < 40; ++c) words.push_back(std::string(syl[c % 8]) + syl[(c / 8) % 8] + syl[(c * 3) % 8]);
    // make every word unique so the diagonal is a strict maximum under LDN similarity
    for (int c = 0; c < 40; ++c) words[static_cast<std::size_t>(c)] += std::string(1, "pbfvmw8tdszcnrlSZCjT5ykgxNqXh7L4G!ieE3auo"[c]);
    const auto a = doculect("A", words), b = doculect("B", words);
    const SimilarityFn sim = [](const Form& x, const Form& y) { return 1.0 - ldn(x, y); };
    const auto s = language_pair_stats(a, b, sim);
    CHECK(s.shared == 40);
    for (double p : s.p_values) CHECK(p == 1.0 / 1561.0);
    CHECK(s.distance == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lists without shared concepts") {
    const auto a = doculect("A", {"pa", ""}), b = doculect("B", {"", "ti"});
    const SimilarityFn sim = [](const Form&, const Form&) { return 0.0; };
    CHECK(code_of([&] { language_pair_stats(a, b, sim); }) == code(ErrorCode::NoSharedConcepts));
}

TEST_CASE("distance matrix is symmetric, masked, and thread independent") {
    SynthOptions o;
    o.families = 2;
    o.doculects_per_family = 5;
    auto data = synthesize(o, 3);
    for (auto& d : data.corpus.doculects) d.entries[0].clear();
    data.corpus.doculects.push_back(doculect("LONE", {"pa"}));
    PmiModel m;
    for (std::size_t a = 0; a < kAlphabetSize; ++a) m.at(static_cast<Symbol>(a), static_cast<Symbol>(a)) = 3.0;
    for (auto& s : m.scores) s = s == 0.0 ? -1.0 : s;
    set_thread_count(1);
    const auto d1 = distance_matrix(data.corpus, m);
    set_thread_count(4);
    const auto d4 = distance_matrix(data.corpus, m);
    set_thread_count(0);
    const auto n = d1.size();
    REQUIRE(n == 11);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(d1.missing(i, j) == d4.missing(i, j));
            if (!d1.missing(i, j)) CHECK(d1.at(i, j) == d4.at(i, j));
            CHECK(d1.missing(i, j) == d1.missing(j, i));
            if (i != j && i < 10 && j < 10) {
                CHECK_FALSE(d1.missing(i, j));
                CHECK(d1.at(i, j) == d1.at(j, i));
            }
        }
    CHECK(d1.missing(0, 10));
    CHECK(d1.has_missing());
}

TEST_CASE("distance files") {
    DistanceMatrix d({"a b", "c", "d'e"});
    d.set(0, 1, 0.25);
    d.set(0, 2, 1.0 / 3.0);
    d.set_missing(1, 2);
    std::stringstream csv;
    write_distance_csv(d, csv);
    const auto back = read_distance_csv(csv);
    CHECK(back.ids() == d.ids());
    CHECK(back.at(0, 2) == d.at(0, 2));
    CHECK(back.missing(2, 1));
    std::ostringstream nex;
    write_distance_nexus(d, nex);
    CHECK(nex.str().find("'a b'") != std::string::npos);
    CHECK(nex.str().find("'d''e'") != std::string::npos);
    CHECK(nex.str().find("NTAX=3") != std::string::npos);
    CHECK(nexus_label("plain_1.x-y") == "plain_1.x-y");
}
