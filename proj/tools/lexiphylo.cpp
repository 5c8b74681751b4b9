// Command-line front end. Talks to the library only through lexiphylo.h.
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "lexiphylo.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kStage = 3 };

struct Failure {
    lp_status status;
};

void check(lp_status s) {
    if (s != LP_OK) throw Failure{s};
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
    T** out() { return &p; }
    T* get() const { return p; }
};
using Corpus = Handle<lp_corpus, lp_corpus_free>;
using Model = Handle<lp_model, lp_model_free>;
using Distances = Handle<lp_distances, lp_distances_free>;
using Tree = Handle<lp_tree, lp_tree_free>;

std::string take(char* s) {
    std::string out = s ? s : "";
    lp_string_free(s);
    return out;
}

lp_classifier_kind kind_of(const std::string& k) {
    return k == "logistic" ? LP_CLASSIFIER_LOGISTIC : LP_CLASSIFIER_SVM;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lexiphylo: lexical distances, cognate classes and trees from ASJP-style word lists"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lp_version()));
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = LEXIPHYLO_THREADS or all cores)");
    bool keep_nonnatural = false;
    app.add_flag("--keep-nonnatural", keep_nonnatural, "keep reconstructed, artificial, pidgin and creole doculects");

    std::string corpus_path, model_path, out_path, dist_path, gold_path;
    std::uint64_t seed = 1;

    auto* train = app.add_subcommand("train-pmi", "learn PMI sound-class scores from a corpus");
    lp_train_options topt;
    lp_train_options_default(&topt);
    bool optimize = false;
    train->add_option("--corpus", corpus_path, "corpus CSV")->required();
    train->add_option("--out", out_path, "scores CSV (gaps go to <stem>.gaps.csv)")->required();
    train->add_flag("--optimize", optimize, "search gap penalties and theta with Nelder-Mead");
    train->add_option("--gap-open", topt.gap_open);
    train->add_option("--gap-extend", topt.gap_extend);
    train->add_option("--theta", topt.theta);
    train->add_option("--iterations", topt.refine_iterations)->check(CLI::NonNegativeNumber);
    train->add_option("--seed", seed);

    auto* dist = app.add_subcommand("distances", "pairwise doculect distances");
    std::string nexus_path;
    bool use_ldn = false, use_geo = false;
    dist->add_option("--corpus", corpus_path)->required();
    auto* dist_model = dist->add_option("--model", model_path, "PMI scores CSV");
    auto* dist_ldn = dist->add_flag("--ldn", use_ldn, "mean normalized Levenshtein distance instead of PMI");
    auto* dist_geo = dist->add_flag("--geo", use_geo, "great-circle kilometres from coordinates");
    dist_model->excludes(dist_ldn)->excludes(dist_geo);
    dist_ldn->excludes(dist_geo);
    dist->add_option("--out", out_path, "distance CSV")->required();
    dist->add_option("--nexus", nexus_path, "also write a NEXUS DISTANCES block");

    auto* cluster = app.add_subcommand("cluster", "cluster words into cognate classes");
    std::string classifier_path, save_classifier, selection_csv, kind = "svm";
    double threshold = 0.25;
    std::size_t training_pairs = 7000, splits = 10;
    unsigned mask = 0;
    bool run_selection = false;
    cluster->add_option("--corpus", corpus_path)->required();
    cluster->add_option("--model", model_path)->required();
    cluster->add_option("--distances", dist_path)->required();
    auto* cl_gold = cluster->add_option("--gold", gold_path, "gold cognate CSV to train the classifier on");
    auto* cl_cls = cluster->add_option("--classifier", classifier_path, "pretrained classifier");
    cl_gold->excludes(cl_cls);
    cluster->add_option("--out", out_path, "cognate CSV")->required();
    cluster->add_option("--save-classifier", save_classifier);
    cluster->add_flag("--model-selection", run_selection, "pick the feature subset by cross-family validation first");
    cluster->add_option("--selection-out", selection_csv, "ranked subset scores CSV");
    cluster->add_option("--splits", splits);
    cluster->add_option("--mask", mask, "feature bit mask (default f3+f5)")->check(CLI::Range(0u, 127u));
    cluster->add_option("--training-pairs", training_pairs);
    cluster->add_option("--kind", kind)->check(CLI::IsMember({"svm", "logistic"}));
    cluster->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0));
    cluster->add_option("--seed", seed);
    std::string evaluate_path;
    cluster->add_option("--evaluate", evaluate_path, "print B-cubed scores against this gold CSV");

    auto* chars = app.add_subcommand("chars", "binary character matrices for tree search");
    std::string cognates_path, prefix;
    chars->add_option("--corpus", corpus_path)->required();
    chars->add_option("--cognates", cognates_path)->required();
    chars->add_option("--out-prefix", prefix)->required();

    auto* nj = app.add_subcommand("bionj", "BIONJ tree from a distance matrix");
    nj->add_option("--distances", dist_path)->required();
    nj->add_option("--out", out_path, "Newick file (stdout if omitted)");

    auto* quartet = app.add_subcommand("gqd", "generalized quartet distance to a reference tree");
    std::string tree_path;
    quartet->add_option("--tree", tree_path)->required();
    quartet->add_option("--gold", gold_path, "reference Newick")->required();
    quartet->add_option("--seed", seed);

    auto* mant = app.add_subcommand("mantel", "Mantel test between two distance matrices");
    std::string geo_path, ling_path, correlogram_path;
    std::size_t permutations = 999;
    mant->add_option("--geo", geo_path)->required();
    mant->add_option("--ling", ling_path)->required();
    mant->add_option("--permutations", permutations);
    mant->add_option("--seed", seed);
    mant->add_option("--correlogram", correlogram_path, "write the distance-class correlogram CSV here");

    auto* punct = app.add_subcommand("punctuation", "root-to-tip path length vs node count per family");
    std::string trees_dir, delta_path;
    double alpha = 0.05;
    punct->add_option("--corpus", corpus_path)->required();
    punct->add_option("--distances", dist_path)->required();
    punct->add_option("--trees", trees_dir, "directory of <family>.tre rooted trees")->check(CLI::ExistingDirectory);
    punct->add_option("--delta", delta_path, "CSV family,delta_positive")->required();
    punct->add_option("--alpha", alpha);
    punct->add_option("--out", out_path)->required();

    auto* pipe = app.add_subcommand("pipeline", "run the configured stages with caching");
    std::string config_path;
    pipe->add_option("config", config_path, "key=value config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        check(lp_set_threads(threads));
        const int exclude = keep_nonnatural ? 0 : 1;

        if (*train) {
            Corpus c;
            check(lp_corpus_load(corpus_path.c_str(), exclude, c.out()));
            topt.optimize = optimize ? 1 : 0;
            topt.seed = seed;
            Model m;
            check(lp_train_pmi(c.get(), &topt, m.out()));
            check(lp_model_save(m.get(), out_path.c_str()));
            double go = 0, ge = 0;
            check(lp_model_gaps(m.get(), &go, &ge));
            std::printf("trained on %zu doculects, gap_open=%g gap_extend=%g\n", lp_corpus_size(c.get()), go, ge);
        } else if (*dist) {
            if (!use_geo && !use_ldn && model_path.empty()) {
                std::fprintf(stderr, "distances: --model, --ldn or --geo is required\n");
                return kUsage;
            }
            Corpus c;
            check(lp_corpus_load(corpus_path.c_str(), exclude, c.out()));
            Distances d;
            if (use_geo) {
                check(lp_distances_geo(c.get(), d.out()));
            } else if (use_ldn) {
                check(lp_distances_ldn(c.get(), d.out()));
            } else {
                Model m;
                check(lp_model_load(model_path.c_str(), m.out()));
                check(lp_distances_compute(c.get(), m.get(), d.out()));
            }
            check(lp_distances_save(d.get(), out_path.c_str()));
            if (!nexus_path.empty()) check(lp_distances_save_nexus(d.get(), nexus_path.c_str()));
        } else if (*cluster) {
            if (gold_path.empty() && classifier_path.empty()) {
                std::fprintf(stderr, "cluster: --gold or --classifier is required\n");
                return kUsage;
            }
            Corpus c;
            check(lp_corpus_load(corpus_path.c_str(), exclude, c.out()));
            Model m;
            check(lp_model_load(model_path.c_str(), m.out()));
            Distances d;
            check(lp_distances_load(dist_path.c_str(), d.out()));
            std::string cls = classifier_path;
            if (cls.empty()) {
                if (run_selection) {
                    double best_f = 0;
                    check(lp_model_selection(gold_path.c_str(), m.get(), splits, training_pairs, kind_of(kind), seed,
                                             selection_csv.empty() ? nullptr : selection_csv.c_str(), &mask, &best_f));
                    std::printf("selected feature mask %u (mean B-cubed F %.4f)\n", mask, best_f);
                }
                cls = save_classifier.empty() ? out_path + ".classifier" : save_classifier;
                check(lp_classifier_train(gold_path.c_str(), m.get(), mask, training_pairs, kind_of(kind), seed,
                                          cls.c_str()));
            }
            check(lp_cluster(c.get(), m.get(), d.get(), cls.c_str(), threshold, seed, out_path.c_str()));
            if (!evaluate_path.empty()) {
                double p = 0, r = 0, f = 0;
                check(lp_bcubed(evaluate_path.c_str(), out_path.c_str(), &p, &r, &f));
                std::printf("bcubed precision=%.4f recall=%.4f f=%.4f\n", p, r, f);
            }
        } else if (*chars) {
            Corpus c;
            check(lp_corpus_load(corpus_path.c_str(), exclude, c.out()));
            std::size_t cc = 0, sc = 0;
            check(lp_chars_export(c.get(), cognates_path.c_str(), prefix.c_str(), &cc, &sc));
            std::printf("%zu cognate-class and %zu sound-class characters\n", cc, sc);
        } else if (*nj) {
            Distances d;
            check(lp_distances_load(dist_path.c_str(), d.out()));
            Tree t;
            check(lp_bionj(d.get(), t.out()));
            if (out_path.empty()) {
                char* s = nullptr;
                check(lp_tree_newick(t.get(), &s));
                std::printf("%s\n", take(s).c_str());
            } else {
                check(lp_tree_save(t.get(), out_path.c_str()));
            }
        } else if (*quartet) {
            Tree t, g;
            check(lp_tree_load(tree_path.c_str(), t.out()));
            check(lp_tree_load(gold_path.c_str(), g.out()));
            double v = 0, se = 0;
            std::uint64_t resolved = 0;
            int exact = 0;
            check(lp_gqd(t.get(), g.get(), seed, &v, &se, &resolved, &exact));
            std::printf("gqd=%.6f se=%.6f resolved=%llu exact=%d\n", v, se,
                        static_cast<unsigned long long>(resolved), exact);
        } else if (*mant) {
            Distances g, l;
            check(lp_distances_load(geo_path.c_str(), g.out()));
            check(lp_distances_load(ling_path.c_str(), l.out()));
            double r = 0, p = 0;
            check(lp_mantel(g.get(), l.get(), permutations, seed, &r, &p));
            std::printf("r=%.6f p=%.6f\n", r, p);
            if (!correlogram_path.empty()) {
                char* s = nullptr;
                check(lp_correlogram(g.get(), l.get(), permutations, seed, &s));
                const auto csv = take(s);
                std::FILE* f = std::fopen(correlogram_path.c_str(), "wb");
                if (!f) {
                    std::fprintf(stderr, "cannot write %s\n", correlogram_path.c_str());
                    return kData;
                }
                std::fwrite(csv.data(), 1, csv.size(), f);
                std::fclose(f);
            }
        } else if (*punct) {
            Corpus c;
            check(lp_corpus_load(corpus_path.c_str(), exclude, c.out()));
            Distances d;
            check(lp_distances_load(dist_path.c_str(), d.out()));
            check(lp_punctuation(c.get(), d.get(), trees_dir.empty() ? nullptr : trees_dir.c_str(),
                                 delta_path.c_str(), alpha, out_path.c_str()));
        } else if (*pipe) {
            char* manifest = nullptr;
            check(lp_pipeline_run(config_path.c_str(), threads, &manifest));
            std::printf("%s", take(manifest).c_str());
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "lexiphylo: %s\n", lp_last_error());
        if (f.status == LP_STAGE_FAILURE) return kStage;
        if (f.status == LP_INVALID_ARGUMENT) return kUsage;
        return kData;
    }
    return kOk;
}
