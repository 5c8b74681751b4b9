#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "lexiphylo.h"

namespace fs = std::filesystem;

namespace {

const std::string kMini = LEXIPHYLO_DATA_DIR "/mini";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("lexiphylo_capi_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string take(char* s) {
    std::string r = s ? s : "";
    lp_string_free(s);
    return r;
}

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(lp_version()) == "0.1.0");
    CHECK(std::string(lp_status_name(LP_OK)) == "Ok");
    CHECK(std::string(lp_status_name(LP_STAGE_FAILURE)) == "StageFailure");
    CHECK(std::string(lp_status_name(static_cast<lp_status>(1234))) == "Unknown");
}

TEST_CASE("errors come back as codes with a message") {
    lp_corpus* c = nullptr;
    CHECK(lp_corpus_load("/nonexistent/words.csv", 1, &c) == LP_IO);
    CHECK(c == nullptr);
    CHECK(std::string(lp_last_error()).size() > 0);
    CHECK(lp_corpus_load(nullptr, 1, &c) == LP_INVALID_ARGUMENT);
    CHECK(lp_corpus_load("x", 1, nullptr) == LP_INVALID_ARGUMENT);

    lp_tree* t = nullptr;
    CHECK(lp_tree_parse("((a,b),c", &t) == LP_SYNTAX_ERROR);
    CHECK(t == nullptr);
}

TEST_CASE("end to end through the C interface") {
    const auto dir = scratch("e2e");
    lp_corpus* corpus = nullptr;
    REQUIRE(lp_corpus_load((kMini + "/corpus.csv").c_str(), 1, &corpus) == LP_OK);
    CHECK(lp_corpus_size(corpus) == 20);
    char* id = nullptr;
    REQUIRE(lp_corpus_doculect_id(corpus, 0, &id) == LP_OK);
    CHECK(take(id).rfind("F", 0) == 0);
    CHECK(lp_corpus_doculect_id(corpus, 20, &id) == LP_OUT_OF_RANGE);

    lp_train_options opt;
    lp_train_options_default(&opt);
    CHECK(opt.gap_open == doctest::Approx(-2.330));
    CHECK(opt.gap_extend == doctest::Approx(-1.276));
    CHECK(opt.theta == doctest::Approx(4.401));
    opt.seed = 5;
    lp_model* model = nullptr;
    REQUIRE(lp_train_pmi(corpus, &opt, &model) == LP_OK);
    const auto model_path = (dir / "model.csv").string();
    REQUIRE(lp_model_save(model, model_path.c_str()) == LP_OK);
    lp_model* reloaded = nullptr;
    REQUIRE(lp_model_load(model_path.c_str(), &reloaded) == LP_OK);
    double s1 = 0, s2 = 0;
    REQUIRE(lp_model_score(model, 'p', 'b', &s1) == LP_OK);
    REQUIRE(lp_model_score(reloaded, 'p', 'b', &s2) == LP_OK);
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-12));
    CHECK(lp_model_score(model, 'Q', 'b', &s1) == LP_UNKNOWN_SYMBOL);

    double score = 0;
    char *ga = nullptr, *gb = nullptr;
    REQUIRE(lp_align(model, "hund", "hun", &score, &ga, &gb) == LP_OK);
    const std::string sa = take(ga), sb = take(gb);
    CHECK(sa.size() == sb.size());
    CHECK(sa == "hund");
    CHECK(lp_align(model, "", "hun", &score, nullptr, nullptr) == LP_EMPTY_FORM);

    lp_distances* d = nullptr;
    REQUIRE(lp_distances_compute(corpus, model, &d) == LP_OK);
    REQUIRE(lp_distances_size(d) == 20);
    double v = -1;
    CHECK(lp_distances_get(d, 3, 3, &v) == LP_OK);
    CHECK(v == 0.0);
    double a = 0, b = 0;
    lp_distances_get(d, 1, 7, &a);
    lp_distances_get(d, 7, 1, &b);
    CHECK(a == b);
    CHECK(lp_distances_get(d, 0, 99, &v) == LP_OUT_OF_RANGE);
    const auto dist_path = (dir / "d.csv").string();
    REQUIRE(lp_distances_save(d, dist_path.c_str()) == LP_OK);
    CHECK(lp_distances_save_nexus(d, (dir / "d.nex").string().c_str()) == LP_OK);

    const auto clf = (dir / "clf.txt").string();
    REQUIRE(lp_classifier_train((kMini + "/training_gold.csv").c_str(), model, 0, 2000, LP_CLASSIFIER_SVM, 3,
                                clf.c_str()) == LP_OK);
    const auto cog = (dir / "cognates.csv").string();
    REQUIRE(lp_cluster(corpus, model, d, clf.c_str(), 0.5, 9, cog.c_str()) == LP_OK);
    double p = 0, r = 0, f = 0;
    REQUIRE(lp_bcubed((kMini + "/gold.csv").c_str(), cog.c_str(), &p, &r, &f) == LP_OK);
    CHECK(f > 0.8);
    CHECK(f <= 1.0);

    size_t cc = 0, sc = 0;
    REQUIRE(lp_chars_export(corpus, cog.c_str(), (dir / "chars").string().c_str(), &cc, &sc) == LP_OK);
    CHECK(cc > 0);
    CHECK(sc > 0);
    CHECK(fs::exists(dir / "chars.phy"));
    CHECK(fs::exists(dir / "chars.part.txt"));

    lp_tree* tree = nullptr;
    REQUIRE(lp_bionj(d, &tree) == LP_OK);
    CHECK(lp_tree_leaf_count(tree) == 20);
    char* nwk = nullptr;
    REQUIRE(lp_tree_newick(tree, &nwk) == LP_OK);
    CHECK(take(nwk).back() == ';');
    lp_tree* expert = nullptr;
    REQUIRE(lp_tree_load((kMini + "/expert.tre").c_str(), &expert) == LP_OK);
    double g = -1, se = -1;
    uint64_t resolved = 0;
    int exact = 0;
    REQUIRE(lp_gqd(tree, expert, 1, &g, &se, &resolved, &exact) == LP_OK);
    CHECK(exact == 1);
    CHECK(se == 0.0);
    CHECK(resolved > 0);
    CHECK(g < 0.2);

    lp_distances* geo = nullptr;
    REQUIRE(lp_distances_geo(corpus, &geo) == LP_OK);
    double mr = 0, mp = 0;
    REQUIRE(lp_mantel(geo, d, 99, 4, &mr, &mp) == LP_OK);
    CHECK(mp >= 0.01);
    CHECK(mp <= 1.0);
    char* csv = nullptr;
    REQUIRE(lp_correlogram(geo, d, 99, 4, &csv) == LP_OK);
    CHECK(take(csv).rfind("lower,upper,pairs,empty,r,p,significant", 0) == 0);

    lp_tree_free(expert);
    lp_tree_free(tree);
    lp_distances_free(geo);
    lp_distances_free(d);
    lp_model_free(reloaded);
    lp_model_free(model);
    lp_corpus_free(corpus);
}

TEST_CASE("free functions accept null") {
    lp_corpus_free(nullptr);
    lp_model_free(nullptr);
    lp_distances_free(nullptr);
    lp_tree_free(nullptr);
    lp_string_free(nullptr);
    CHECK(lp_corpus_size(nullptr) == 0);
    CHECK(lp_tree_leaf_count(nullptr) == 0);
}

TEST_CASE("pipeline through the C interface") {
    const auto dir = scratch("pipe");
    const auto cfg = (dir / "run.cfg").string();
    {
        std::ofstream out(cfg);
        out << "corpus = " << kMini << "/corpus.csv\n"
            << "gold = " << kMini << "/training_gold.csv\n"
            << "output_dir = out\nseed = 1\n";
    }
    char* manifest = nullptr;
    REQUIRE(lp_pipeline_run(cfg.c_str(), 1, &manifest) == LP_OK);
    const std::string m = take(manifest);
    CHECK(m.find("lexiphylo-manifest-1") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "bionj.tre"));

    { std::ofstream(cfg) << "corpus = nothing.csv\noutput_dir = out\n"; }
    CHECK(lp_pipeline_run(cfg.c_str(), 0, nullptr) == LP_INVALID_ARGUMENT);
}
