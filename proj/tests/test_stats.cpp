#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/stats.hpp"
#include "lexiphylo/synth.hpp"
#include "oracles.hpp"

using namespace lexiphylo;
using fixture::code;
using fixture::code_of;

namespace {

DistanceMatrix random_matrix(const std::vector<std::string>& ids, Rng& rng) {
    DistanceMatrix d(ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) d.set(i, j, rng.uniform());
    return d;
}

std::vector<std::string> names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(i));
    return out;
}

}  // namespace

TEST_CASE("great-circle distances") {
    CHECK(std::abs(great_circle(0, 0, 0, 180) - 20015.1) <= 0.1);
    CHECK(great_circle(0, 0, 0, 180) == doctest::Approx(std::numbers::pi * kEarthRadiusKm));
    CHECK(great_circle(90, 0, -90, 0) == doctest::Approx(std::numbers::pi * kEarthRadiusKm));
    CHECK(great_circle(0, 0, 0, 90) == doctest::Approx(std::numbers::pi / 2 * kEarthRadiusKm));
    CHECK(great_circle(10, 20, 10, 20) == 0.0);
    CHECK(great_circle(51.5, -0.12, 48.85, 2.35) == doctest::Approx(343.5).epsilon(0.01));
    CHECK(code_of([] { great_circle(91, 0, 0, 0); }) == code(ErrorCode::OutOfRange));
    CHECK(code_of([] { great_circle(0, 0, 0, 181); }) == code(ErrorCode::OutOfRange));
}

TEST_CASE("cosine character distance") {
    CharacterMatrix m({"a", "b", "c", "z"}, {"x1", "x2", "x3", "x4"}, std::vector<CharKind>(4, CharKind::SoundClass));
    const std::int8_t rows[4][4] = {{1, 1, 0, -1}, {1, 0, 1, 1}, {1, 1, 0, 0}, {0, 0, 0, 1}};
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t c = 0; c < 4; ++c) m.set(t, c, rows[t][c]);
    CHECK(cosine_character_distance(m, 0, 1) == doctest::Approx(1 - 1 / (std::sqrt(2.0) * std::sqrt(2.0))));
    CHECK(cosine_character_distance(m, 0, 2) == doctest::Approx(0.0));
    // z has no 1 among the characters defined for a
    CHECK(code_of([&] { cosine_character_distance(m, 0, 3); }) == code(ErrorCode::ZeroVector));
}

TEST_CASE("Mantel test") {
    Rng rng(6);
    const auto ids = names(12);
    const auto a = random_matrix(ids, rng);
    SUBCASE("identical matrices hit the p floor") {
        const auto r = mantel(a, a, 999, 1);
        CHECK(r.r == doctest::Approx(1.0));
        CHECK(r.p == doctest::Approx(0.001));
        CHECK(r.pairs == 66);
    }
    SUBCASE("r is the Pearson correlation of the upper triangles") {
        const auto b = random_matrix(ids, rng);
        std::vector<double> x, y;
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = i + 1; j < 12; ++j) x.push_back(a.at(i, j)), y.push_back(b.at(i, j));
        const auto r = mantel(a, b, 199, 3);
        CHECK(r.r == doctest::Approx(pearson_correlation(x, y)));
        CHECK((r.p > 0.0 && r.p <= 1.0));
        CHECK(mantel(a, b, 199, 3).p == r.p);
    }
    SUBCASE("taxa order does not matter") {
        auto rev = ids;
        std::reverse(rev.begin(), rev.end());
        const auto b = a.subset(rev);
        CHECK(mantel(a, b, 99, 1).r == doctest::Approx(1.0));
    }
    SUBCASE("errors") {
        const auto small = random_matrix(names(5), rng);
        CHECK(code_of([&] { mantel(a, small); }) == code(ErrorCode::SizeMismatch));
        auto holes = a;
        holes.set_missing(0, 1);
        CHECK(code_of([&] { mantel(a, holes); }) == code(ErrorCode::MissingEntries));
    }
}

TEST_CASE("Mantel correlogram") {
    Rng rng(12);
    const auto ids = names(10);
    DistanceMatrix geo(ids), ling(ids);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = i + 1; j < 10; ++j) {
            const double km = 300.0 * static_cast<double>(j - i) + rng.uniform(0, 100);
            geo.set(i, j, km);
            ling.set(i, j, km / 3000.0 + rng.uniform(0, 0.05));
        }
    const auto bins = mantel_correlogram(geo, ling, default_correlogram_edges(), 199, 2);
    REQUIRE(bins.size() == 10);
    std::size_t pairs = 0;
    for (const auto& b : bins) pairs += b.pairs;
    CHECK(pairs == 45);
    CHECK(bins[0].r > 0.0);  // near pairs are the similar ones
    CHECK(bins[0].significant);
    CHECK(bins[9].empty);
    CHECK(default_correlogram_edges().size() == 11);
}

TEST_CASE("Holm-Bonferroni") {
    CHECK(holm_bonferroni(std::vector<double>{0.01, 0.04, 0.03, 0.005}) == std::vector<bool>{true, false, false, true});
    CHECK(holm_bonferroni(std::vector<double>{0.01, 0.02, 0.03}) == std::vector<bool>{true, true, true});
    CHECK(holm_bonferroni(std::vector<double>{0.02, 0.02}) == std::vector<bool>{true, true});
    CHECK(holm_bonferroni(std::vector<double>{0.04, 0.001}, 0.05) == std::vector<bool>{true, true});
    CHECK(holm_bonferroni(std::vector<double>{0.03, 0.001}, 0.05) == std::vector<bool>{true, true});
    CHECK(holm_bonferroni(std::vector<double>{0.06, 0.001}, 0.05) == std::vector<bool>{false, true});
    CHECK(holm_bonferroni(std::vector<double>{}).empty());
}

TEST_CASE("PGLS on a star tree is OLS") {
    Rng rng(4);
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = 5 + rng.below(20);
        std::string nwk = "(";
        std::map<std::string, double> x, y;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = "s" + std::to_string(i);
            nwk += (i ? "," : "") + id + ":1.5";
            xs.push_back(rng.uniform(0, 10));
            ys.push_back(2.0 * xs.back() + rng.normal());
            x[id] = xs.back();
            y[id] = ys.back();
        }
        auto tree = parse_newick("[&R]" + nwk + ");");
        const auto r = pgls(tree, x, y);
        // x, y in leaf order
        std::vector<double> lx, ly;
        for (const auto& l : tree.leaf_labels()) lx.push_back(x[l]), ly.push_back(y[l]);
        const auto o = oracle::ols(lx, ly);
        CHECK(std::abs(r.slope - o.slope) <= 1e-10);
        CHECK(std::abs(r.intercept - o.intercept) <= 1e-10);
        CHECK(std::abs(r.standard_error - o.se) <= 1e-10);
        CHECK(r.n_taxa == n);
    }
}

TEST_CASE("PGLS matches dense GLS on random trees") {
    Rng rng(19);
    for (int k = 0; k < 20; ++k) {
        const auto tree = oracle::random_binary_tree(6 + rng.below(10), rng);
        const auto labels = tree.leaf_labels();
        std::map<std::string, double> x, y;
        std::vector<double> xs, ys;
        for (const auto& l : labels) {
            xs.push_back(rng.uniform(0, 5));
            ys.push_back(1.0 - 0.5 * xs.back() + rng.normal());
            x[l] = xs.back();
            y[l] = ys.back();
        }
        // covariance = shared root path, from path lengths alone
        const auto g = oracle::graph_of(tree);
        const auto from_root = oracle::distances_from(g, tree.root, false);
        const auto n = static_cast<Eigen::Index>(labels.size());
        Eigen::MatrixXd v(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto& a = labels[static_cast<std::size_t>(i)];
                const auto& b = labels[static_cast<std::size_t>(j)];
                const double dij = i == j ? 0.0 : oracle::path_distance(tree, a, b);
                v(i, j) = (from_root[static_cast<std::size_t>(g.leaf.at(a))] +
                           from_root[static_cast<std::size_t>(g.leaf.at(b))] - dij) / 2;
            }
        const auto want = oracle::gls_dense(xs, ys, v);
        const auto got = pgls(tree, x, y);
        CHECK(got.slope == doctest::Approx(want.slope).epsilon(1e-8));
        CHECK(got.intercept == doctest::Approx(want.intercept).epsilon(1e-8));
        CHECK(got.standard_error == doctest::Approx(want.se).epsilon(1e-8));
        CHECK(got.t == doctest::Approx(got.slope / got.standard_error));
        CHECK((got.p_value >= 0.0 && got.p_value <= 1.0));
    }
}

TEST_CASE("PGLS p-value and input checks") {
    const std::vector<double> x = {0, 1, 2, 3, 4}, y = {0.0, 2.0, 1.0, 4.0, 2.5};
    std::vector<std::vector<double>> id(5, std::vector<double>(5, 0.0));
    for (std::size_t i = 0; i < 5; ++i) id[i][i] = 1.0;
    const auto r = gls(x, y, id);
    const auto o = oracle::ols(x, y);
    CHECK(r.slope == doctest::Approx(o.slope));
    // two-sided Student t tail, 3 df, by Simpson's rule after x = |t|/u
    const double t = std::abs(r.t), df = 3.0;
    const double norm = std::tgamma((df + 1) / 2) / (std::sqrt(df * std::numbers::pi) * std::tgamma(df / 2));
    auto f = [&](double u) {
        if (u == 0.0) return 0.0;
        const double v = t / u;
        return norm * std::pow(1 + v * v / df, -(df + 1) / 2) * t / (u * u);
    };
    const int m = 20000;
    double tail = f(0) + f(1);
    for (int i = 1; i < m; ++i) tail += (i % 2 ? 4 : 2) * f(static_cast<double>(i) / m);
    tail /= 3.0 * m;
    CHECK(r.p_value == doctest::Approx(2 * tail).epsilon(1e-6));
    std::vector<std::vector<double>> zero(5, std::vector<double>(5, 0.0));
    CHECK(code_of([&] { gls(x, y, zero); }) == code(ErrorCode::SingularCovariance));
    const auto unrooted = parse_newick("(a:1,b:1,c:1);");
    CHECK(code_of([&] { pgls(unrooted, {{"a", 1}, {"b", 2}, {"c", 3}}, {{"a", 1}, {"b", 2}, {"c", 3}}); }) ==
          code(ErrorCode::UnrootedTree));
    // identical x and y: slope 1
    const auto tree = parse_newick("((a:1,b:2):1,(c:1,(d:1,e:3):1):1);");
    std::map<std::string, double> same{{"a", 1}, {"b", 3}, {"c", 2}, {"d", 5}, {"e", 4}};
    auto shifted = same;
    shifted["e"] += 0.5;
    CHECK(pgls(tree, same, shifted).slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("punctuation workflow") {
    SynthOptions o;
    o.families = 3;
    o.doculects_per_family = 12;
    const auto data = synthesize(o, 9);
    // generating-tree distances plus noise; exact ones are ultrametric and give constant x
    auto d = oracle::tree_distance_matrix(data.tree);
    Rng rng(1);
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) d.set(i, j, d.at(i, j) + rng.uniform(0, 0.2));
    std::map<std::string, bool> flags{{"F1", false}, {"F2", true}};
    std::map<std::string, Tree> trees;
    const auto rows = punctuation_analysis(data.corpus, d, trees, flags);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].family == "F1");
    CHECK(rows[0].status == "tested");
    CHECK(rows[0].regression.n_taxa == 12);
    CHECK(rows[0].outgroup.rfind("F1", 0) != 0);
    CHECK(rows[1].status == "delta_positive");
    CHECK(rows[2].status == "no_delta_flag");

    PunctuationOptions strict;
    strict.min_taxa = 13;
    CHECK(punctuation_analysis(data.corpus, d, trees, flags, strict)[0].status == "too_few_taxa");

    std::ostringstream out;
    write_punctuation_table(rows, out);
    CHECK(out.str().rfind("family,status,slope,p_value,n_taxa,significant,outgroup\n", 0) == 0);
    std::istringstream flags_in("family,delta_positive\nF1,no\nF2,TRUE\n");
    CHECK(read_delta_flags(flags_in) == flags);
    std::istringstream bad("family,delta\n");
    CHECK(code_of([&] { read_delta_flags(bad); }) == code(ErrorCode::ParseError));
}

TEST_CASE("geographic matrix") {
    std::istringstream in(fixture::corpus_header() + "A,A,F,F,0,0,I,a\nB,B,F,F,0,180,I,a\nC,C,F,F,,,I,a\n");
    const auto c = read_corpus(in);
    const auto g = geo_matrix(c);
    CHECK(g.at(0, 1) == doctest::Approx(std::numbers::pi * kEarthRadiusKm));
    CHECK(g.missing(0, 2));
}
