// Acceptance run: one PASS/FAIL/SKIP line per criterion, exit status 1 if any
// criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexiphylo/chars.hpp"
#include "lexiphylo/cogclust.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/phylo.hpp"
#include "lexiphylo/pipeline.hpp"
#include "lexiphylo/pmi_train.hpp"
#include "lexiphylo/stats.hpp"
#include "lexiphylo/synth.hpp"
#include "oracles.hpp"

using namespace lexiphylo;
namespace fs = std::filesystem;

namespace tol {
constexpr int kAlignPairs = 10000;
constexpr double kAlignAbs = 1e-9;
constexpr double kAlignSeconds = 60.0;
constexpr double kZMaxExpected = 40.18;
constexpr double kZMinExpected = -6.32;
constexpr double kZAbs = 0.01;
constexpr int kPValueTables = 200;
constexpr int kExpSamples = 100000;
constexpr double kSigmas = 3.0;
constexpr std::size_t kCcDog = 2, kCcTree = 0, kScDog = 7, kScTree = 4;
constexpr int kBcubedPairs = 1000;
constexpr std::size_t kBcubedMaxItems = 12;
constexpr int kBionjTrees = 100;
constexpr double kBionjPathAbs = 1e-6;
constexpr double kBionjSeconds = 10.0;
constexpr int kGqdTrees = 5;
constexpr std::size_t kGqdSamples = 200000;
constexpr int kRecoverySeeds = 10;
constexpr std::size_t kRecoveryDoculects = 15;
constexpr double kRecoveryMedianGqd = 0.1;
constexpr double kRecoverySeconds = 300.0;
constexpr double kClusterFloor = 0.80;
constexpr double kPglsAbs = 1e-10;
constexpr double kMantelFloor = 0.001;
constexpr double kAntipodalKm = 20015.1, kAntipodalAbs = 0.1;
constexpr double kFrItAbs = 0.1;
}  // namespace tol

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void skip(const char* name, const std::string& why) {
    std::printf("SKIP %s: %s\n", name, why.c_str());
    std::fflush(stdout);
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

// Run a criterion; an exception counts as a failure.
void criterion(const char* name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(name, false, std::string("threw ") + e.what());
    }
}

void alignment_oracle() {
    Rng rng(20240601);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    for (int k = 0; k < tol::kAlignPairs; ++k) {
        const auto m = oracle::random_model(rng);
        const auto x = oracle::random_form(rng, 1, 6), y = oracle::random_form(rng, 1, 6);
        worst = std::max(worst, std::abs(align_pmi(x, y, m).score - oracle::licit_alignment_max(x, y, m)));
    }
    const double s = seconds_since(t0);
    report("alignment-oracle", worst <= tol::kAlignAbs && s < tol::kAlignSeconds,
           fmt("%d pairs, max |diff| %.3g, %.1f s", tol::kAlignPairs, worst, s));
}

void constants() {
    const double a = std::abs(kZMax - tol::kZMaxExpected), b = std::abs(kZMin - tol::kZMinExpected);
    report("constants", a <= tol::kZAbs && b <= tol::kZAbs, fmt("Z_max %.4f, Z_min %.4f", kZMax, kZMin));
}

void p_value_formula() {
    Rng rng(7);
    int mismatches = 0, checked = 0;
    for (int k = 0; k < tol::kPValueTables; ++k) {
        ConceptSimilarityTable t;
        t.concepts = 40;
        t.values.resize(1600);
        const bool ties = k % 2 == 0;
        for (auto& v : t.values) v = ties ? static_cast<double>(rng.below(8)) : rng.uniform(-5, 10);
        for (std::size_t c = 0; c < 40; ++c, ++checked)
            if (p_value(t, c) != oracle::p_value_count(t, c)) ++mismatches;
    }
    ConceptSimilarityTable t;
    t.concepts = 40;
    t.values.resize(1600);
    for (auto& v : t.values) v = rng.uniform(-5, 10);
    t.values[3 * 40 + 3] = 50.0;
    const double strict = p_value(t, 3);
    report("p-value-formula", mismatches == 0 && strict == 1.0 / 1561.0,
           fmt("%d/%d exact matches, strict maximum p = 1/%.0f", checked - mismatches, checked, 1.0 / strict));
}

void exponential() {
    Rng rng(1);
    double sum = 0, sum2 = 0;
    const double n = tol::kExpSamples;
    for (int i = 0; i < tol::kExpSamples; ++i) {
        const double x = -std::log(rng.uniform_pos());
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n, var = sum2 / n - mean * mean;
    // SE of the mean is 1/sqrt(n); of the variance sqrt((mu4 - 1)/n) = sqrt(8/n)
    const double zm = std::abs(mean - 1) * std::sqrt(n), zv = std::abs(var - 1) / std::sqrt(8.0 / n);
    report("neg-log-uniform", zm <= tol::kSigmas && zv <= tol::kSigmas,
           fmt("mean %.4f (%.2f SE), variance %.4f (%.2f SE)", mean, zm, var, zv));
}

std::size_t differences(const CharacterMatrix& m, const std::string& prefix) {
    std::size_t n = 0;
    for (std::size_t c = 0; c < m.char_count(); ++c)
        if (m.characters()[c].rfind(prefix, 0) == 0 && m.at(0, c) >= 0 && m.at(1, c) >= 0 && m.at(0, c) != m.at(1, c))
            ++n;
    return n;
}

void character_fixtures() {
    std::istringstream in(
        "doculect_id,doculect_name,family,classification_path,latitude,longitude,concept,transcription\n"
        "ANG,Old English,IE,IE/Germanic,,,dog,hund\n"
        "ANG,Old English,IE,IE/Germanic,,,tree,treow\n"
        "ENG,English,IE,IE/Germanic,,,dog,dag\n"
        "ENG,English,IE,IE/Germanic,,,tree,tri\n");
    const auto corpus = read_corpus(in);
    const CognatePartition classes{{{"ANG", "dog", "hund", "dog_149"},
                                    {"ANG", "tree", "treow", "tree_17"},
                                    {"ENG", "dog", "dag", "dog_150"},
                                    {"ENG", "tree", "tri", "tree_17"}}};
    const auto cc = build_cognate_chars(corpus, classes);
    const auto sc = build_soundclass_chars(corpus);
    const std::size_t cd = differences(cc, "dog"), ct = differences(cc, "tree");
    const std::size_t sd = differences(sc, "dog:"), st = differences(sc, "tree:");
    report("character-fixtures", cd == tol::kCcDog && ct == tol::kCcTree && sd == tol::kScDog && st == tol::kScTree,
           fmt("cc dog %zu (want %zu), cc tree %zu (want %zu), sc dog %zu (want %zu), sc tree %zu (want %zu)", cd,
               tol::kCcDog, ct, tol::kCcTree, sd, tol::kScDog, st, tol::kScTree));
}

void bcubed() {
    const std::vector<long> gold = {0, 0, 1}, pred = {0, 0, 0};
    const double f = bcubed_f(gold, pred).f;
    const bool example = std::abs(f - 5.0 / 7.0) <= 1e-15;
    Rng rng(99);
    int bad = 0;
    for (int k = 0; k < tol::kBcubedPairs; ++k) {
        const std::size_t n = 1 + rng.below(tol::kBcubedMaxItems);
        std::vector<long> g(n), p(n), fine(n), coarse(n);
        for (auto& x : g) x = static_cast<long>(rng.below(5));
        for (auto& x : p) x = static_cast<long>(rng.below(5));
        // fine splits every predicted class by a coin, coarse merges predicted classes 0 and 1
        for (std::size_t i = 0; i < n; ++i) {
            fine[i] = p[i] * 2 + static_cast<long>(rng.below(2));
            coarse[i] = p[i] <= 1 ? 0 : p[i];
        }
        const auto b = bcubed_f(g, p), bf = bcubed_f(g, fine), bc = bcubed_f(g, coarse);
        for (const auto* q : {&p, &fine, &coarse}) {
            const auto mine = bcubed_f(g, *q);
            const auto o = oracle::bcubed(g, *q);
            if (std::abs(mine.precision - o.p) > 1e-12 || std::abs(mine.recall - o.r) > 1e-12 ||
                std::abs(mine.f - o.f) > 1e-12)
                ++bad;
        }
        if (bf.precision < b.precision - 1e-12 || bf.recall > b.recall + 1e-12) ++bad;
        if (bc.recall < b.recall - 1e-12 || bc.precision > b.precision + 1e-12) ++bad;
    }
    report("bcubed", example && bad == 0,
           fmt("F = %.15f (5/7 = %.15f), %d random pairs, %d violations", f, 5.0 / 7.0, tol::kBcubedPairs, bad));
}

void bionj_recovery() {
    Rng rng(8);
    const auto t0 = std::chrono::steady_clock::now();
    int recovered = 0;
    double worst = 0;
    for (int k = 0; k < tol::kBionjTrees; ++k) {
        const auto truth = oracle::random_binary_tree(8, rng, 0.05, 1.0);
        const auto d = oracle::tree_distance_matrix(truth);
        const auto t = bionj(d);
        if (oracle::splits(t) == oracle::splits(truth)) ++recovered;
        for (std::size_t i = 0; i < d.size(); ++i)
            for (std::size_t j = i + 1; j < d.size(); ++j)
                worst = std::max(worst, std::abs(oracle::path_distance(t, d.ids()[i], d.ids()[j]) - d.at(i, j)));
    }
    const double s = seconds_since(t0);
    report("bionj", recovered == tol::kBionjTrees && worst <= tol::kBionjPathAbs && s < tol::kBionjSeconds,
           fmt("%d/%d topologies, max path error %.3g, %.2f s", recovered, tol::kBionjTrees, worst, s));
}

void gqd_checks() {
    const auto gold = parse_newick("((a,b),c,(d,e));");
    const auto other = parse_newick("((a,c),b,(d,e));");
    const auto star = parse_newick("(a,b,c,d,e);");
    const auto poly = parse_newick("((a,b),c,d,e);");
    const bool hand = gqd(gold, gold).value == 0.0 && std::abs(gqd(other, gold).value - 0.4) <= 1e-15 &&
                      gqd(star, gold).value == 1.0 && std::abs(gqd(other, poly).value - 2.0 / 3.0) <= 1e-15 &&
                      std::abs(gqd(poly, gold).value - 0.4) <= 1e-15 && gqd(gold, poly).value == 0.0;
    Rng rng(30);
    int within = 0, exact_ok = 0, self_zero = 0;
    double worst_z = 0;
    for (int k = 0; k < tol::kGqdTrees; ++k) {
        const auto a = oracle::random_binary_tree(30, rng), b = oracle::random_binary_tree(30, rng);
        const double want = oracle::gqd_exhaustive(a, b);
        if (std::abs(gqd(a, b).value - want) <= 1e-12) ++exact_ok;
        GqdOptions o;
        o.exact_limit = 10;
        o.samples = tol::kGqdSamples;
        o.seed = static_cast<std::uint64_t>(k + 1);
        const auto s = gqd(a, b, o);
        const double z = std::abs(s.value - want) / s.standard_error;
        worst_z = std::max(worst_z, z);
        if (!s.exact && z <= tol::kSigmas) ++within;
        if (gqd(a, a).value == 0.0 && gqd(a, a, o).value == 0.0) ++self_zero;
    }
    report("gqd", hand && within == tol::kGqdTrees && exact_ok == tol::kGqdTrees && self_zero == tol::kGqdTrees,
           fmt("5-leaf hand values %s, exact = enumeration %d/%d, sampled within 3 SE %d/%d (worst %.2f SE), "
               "gqd(T,T)=0 %d/%d",
               hand ? "ok" : "wrong", exact_ok, tol::kGqdTrees, within, tol::kGqdTrees, worst_z, self_zero,
               tol::kGqdTrees));
}

void synthetic_recovery() {
    set_thread_count(1);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> values;
    for (int s = 1; s <= tol::kRecoverySeeds; ++s) {
        SynthOptions o;
        o.families = 2;
        o.doculects_per_family = tol::kRecoveryDoculects;
        const auto data = synthesize(o, static_cast<std::uint64_t>(s));
        const auto model = train_pmi(data.corpus, TrainingConfig{}).model;
        values.push_back(gqd(bionj(distance_matrix(data.corpus, model)), data.tree).value);
    }
    const double secs = seconds_since(t0);
    set_thread_count(0);
    auto sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
    std::string each;
    for (double v : values) each += fmt(" %.3f", v);
    report("synthetic-recovery", median <= tol::kRecoveryMedianGqd && secs < tol::kRecoverySeconds,
           fmt("median GQD %.4f over %d seeds [%s ], %.1f s", median, tol::kRecoverySeeds, each.c_str() + 1, secs));
}

double held_out_f(ClassifierKind kind) {
    SynthOptions train_opt;
    train_opt.families = 6;
    train_opt.doculects_per_family = 8;
    train_opt.family_prefix = "T";
    const auto train = synthesize(train_opt, 101);
    const auto model = train_pmi(train.corpus, TrainingConfig{}).model;
    const auto gold = index_gold(train.gold);
    const FeatureContext ctx(gold.corpus, model, distance_matrix(gold.corpus, model));
    const auto classifier = train_on_gold(selection_data(gold, ctx), kSelectedFeatures, 5, 7000, kind);

    SynthOptions test_opt;
    test_opt.families = 3;
    test_opt.doculects_per_family = 8;
    test_opt.family_prefix = "H";
    const auto test = synthesize(test_opt, 202);
    const auto d = distance_matrix(test.corpus, model);
    const auto part = cluster_corpus(test.corpus, model, d, classifier);
    std::map<std::string, std::string> g, p;
    for (const auto& r : test.gold.records)
        g[r.doculect_id + "|" + r.concept_name + "|" + r.form.raw] = r.family + "|" + r.cognate_class;
    for (const auto& a : part.items) p[a.doculect_id + "|" + a.concept_name + "|" + a.transcription] = a.cognate_class;
    return bcubed_f(g, p).f;
}

void clustering_floor() {
    const double svm = held_out_f(ClassifierKind::Svm);
    const double logistic = held_out_f(ClassifierKind::Logistic);
    report("clustering-floor", svm >= tol::kClusterFloor && logistic >= tol::kClusterFloor,
           fmt("held-out B-cubed F: svm %.4f, logistic %.4f (floor %.2f)", svm, logistic, tol::kClusterFloor));
}

void statistics() {
    Rng rng(4);
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const std::size_t n = 5 + rng.below(20);
        std::string nwk = "[&R](";
        std::map<std::string, double> x, y;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = "s" + std::to_string(i);
            nwk += (i ? "," : "") + id + ":1.5";
            x[id] = rng.uniform(0, 10);
            y[id] = 2.0 * x[id] + rng.normal();
        }
        const auto tree = parse_newick(nwk + ");");
        const auto r = pgls(tree, x, y);
        std::vector<double> lx, ly;
        for (const auto& l : tree.leaf_labels()) lx.push_back(x[l]), ly.push_back(y[l]);
        const auto o = oracle::ols(lx, ly);
        worst = std::max({worst, std::abs(r.slope - o.slope), std::abs(r.intercept - o.intercept),
                          std::abs(r.standard_error - o.se)});
    }
    using V = std::vector<double>;
    using B = std::vector<bool>;
    const bool holm = holm_bonferroni(V{0.01, 0.04, 0.03, 0.005}) == B{true, false, false, true} &&
                      holm_bonferroni(V{0.01, 0.02, 0.03}) == B{true, true, true} &&
                      holm_bonferroni(V{0.06, 0.001}) == B{false, true} &&
                      holm_bonferroni(V{0.02, 0.02}) == B{true, true};
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) ids.push_back("t" + std::to_string(i));
    DistanceMatrix a(ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) a.set(i, j, rng.uniform());
    const double mp = mantel(a, a, 999, 1).p;
    const double km = great_circle(0, 0, 0, 180);
    report("statistics",
           worst <= tol::kPglsAbs && holm && std::abs(mp - tol::kMantelFloor) <= 1e-15 &&
               std::abs(km - tol::kAntipodalKm) <= tol::kAntipodalAbs,
           fmt("pgls vs ols max diff %.2g, holm %s, mantel p floor %.4f, antipodal %.2f km", worst,
               holm ? "exact" : "wrong", mp, km));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism() {
    const std::string mini = LEXIPHYLO_DATA_DIR "/mini";
    const auto root = fs::temp_directory_path() / "lexiphylo_acceptance";
    fs::remove_all(root);
    auto run = [&](const std::string& name, unsigned threads) {
        PipelineConfig c;
        c.corpus = mini + "/corpus.csv";
        c.gold = mini + "/training_gold.csv";
        c.expert_tree = mini + "/expert.tre";
        c.output_dir = (root / name).string();
        c.cache_dir = (root / name / "cache").string();
        c.seed = 20240601;
        c.threads = threads;
        return run_pipeline(c);
    };
    const auto a = run("a", 1), b = run("b", 1), c = run("c", 8);
    const bool manifests = slurp(root / "a" / "manifest.json") == slurp(root / "b" / "manifest.json");
    bool artifacts = a.artifacts.size() == c.artifacts.size();
    for (const auto& art : a.artifacts) artifacts = artifacts && slurp(root / "a" / art.path) == slurp(root / "c" / art.path);
    report("determinism", manifests && artifacts,
           fmt("same seed twice: manifests %s; 1 vs 8 threads: %zu artifacts %s", manifests ? "identical" : "differ",
               a.artifacts.size(), artifacts ? "identical" : "differ"));
    fs::remove_all(root);
}

void french_italian() {
    const char* env = std::getenv("LEXIPHYLO_PUBLISHED_PMI");
    const std::string path = env ? env : LEXIPHYLO_DATA_DIR "/published/pmi.csv";
    if (!fs::exists(path) || !fs::exists(gaps_path_for(path))) {
        skip("french-italian", "published PMI parameter files not present (" + path + ")");
        return;
    }
    const auto model = load_model(path);
    const struct {
        const char *fr, *it;
        double want;
    } pairs[] = {{"sole", "sole", 11.6}, {"korn", "korno", 7.7}, {"arbr3", "albero", 7.1},
                 {"nuvo", "nwovo", 7.0}, {"motaj", "monta5a", 4.9}};
    bool ok = true;
    std::string detail;
    for (const auto& p : pairs) {
        const double s = pmi_similarity(strip_diacritics(p.fr), strip_diacritics(p.it), model);
        ok = ok && std::abs(s - p.want) <= tol::kFrItAbs;
        detail += fmt("%s-%s %.2f (%.1f) ", p.fr, p.it, s, p.want);
    }
    detail.pop_back();
    report("french-italian", ok, detail);
}

}  // namespace

int main() {
    criterion("alignment-oracle", alignment_oracle);
    criterion("constants", constants);
    criterion("p-value-formula", p_value_formula);
    criterion("neg-log-uniform", exponential);
    criterion("character-fixtures", character_fixtures);
    criterion("bcubed", bcubed);
    criterion("bionj", bionj_recovery);
    criterion("gqd", gqd_checks);
    criterion("synthetic-recovery", synthetic_recovery);
    criterion("clustering-floor", clustering_floor);
    criterion("statistics", statistics);
    criterion("determinism", determinism);
    criterion("french-italian", french_italian);
    std::printf("%d failed\n", failures);
    return failures ? 1 : 0;
}
