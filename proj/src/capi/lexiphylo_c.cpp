#include "lexiphylo.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "lexiphylo/chars.hpp"
#include "lexiphylo/cogclust.hpp"
#include "lexiphylo/corpus.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/numfmt.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/phylo.hpp"
#include "lexiphylo/pipeline.hpp"
#include "lexiphylo/pmi_train.hpp"
#include "lexiphylo/stats.hpp"

using namespace lexiphylo;

struct lp_corpus {
    Corpus value;
};
struct lp_model {
    PmiModel value;
};
struct lp_distances {
    DistanceMatrix value;
};
struct lp_tree {
    Tree value;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
lp_status guard(F&& body) {
    try {
        body();
        g_last_error.clear();
        return LP_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<lp_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return LP_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LP_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ClassifierKind kind_of(lp_classifier_kind k) {
    if (k == LP_CLASSIFIER_SVM) return ClassifierKind::Svm;
    if (k == LP_CLASSIFIER_LOGISTIC) return ClassifierKind::Logistic;
    fail(ErrorCode::InvalidArgument, "unknown classifier kind");
}

Symbol symbol_of(char c) {
    const auto s = SoundClassAlphabet::index_of(c);
    if (!s) fail(ErrorCode::UnknownSymbol, std::string("'") + c + "' is not a sound class");
    return *s;
}

SelectionData gold_selection(const std::string& gold_path, const PmiModel& model, GoldIndex& gold) {
    gold = index_gold(load_gold(gold_path));
    const auto d = distance_matrix(gold.corpus, model);
    const FeatureContext context(gold.corpus, model, d);
    return selection_data(gold, context);
}

std::string mask_names(FeatureMask mask) {
    std::string out;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        if (mask & (1u << f)) out += (out.empty() ? "" : "+") + feature_names()[f];
    return out;
}

}  // namespace

extern "C" {

const char* lp_version(void) { return "0.1.0"; }

const char* lp_status_name(lp_status status) {
    if (status == LP_OK) return "Ok";
    if (status == LP_INTERNAL) return "Internal";
    if (status < LP_INVALID_ARGUMENT || status > LP_STAGE_FAILURE) return "Unknown";
    return error_code_name(static_cast<ErrorCode>(static_cast<int>(status)));
}

const char* lp_last_error(void) { return g_last_error.c_str(); }

void lp_string_free(char* s) { std::free(s); }

lp_status lp_set_threads(unsigned n) {
    return guard([&] { set_thread_count(n); });
}

lp_status lp_corpus_load(const char* path, int exclude_nonnatural, lp_corpus** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        LoadOptions o;
        o.exclude_nonnatural = exclude_nonnatural != 0;
        *out = new lp_corpus{load_corpus(path, o)};
    });
}

void lp_corpus_free(lp_corpus* corpus) { delete corpus; }

size_t lp_corpus_size(const lp_corpus* corpus) { return corpus ? corpus->value.doculects.size() : 0; }

lp_status lp_corpus_doculect_id(const lp_corpus* corpus, size_t i, char** out) {
    return guard([&] {
        need(corpus, "corpus");
        need(out, "out");
        if (i >= corpus->value.doculects.size()) fail(ErrorCode::OutOfRange, "doculect index out of range");
        *out = dup(corpus->value.doculects[i].id);
    });
}

void lp_train_options_default(lp_train_options* options) {
    if (!options) return;
    const TrainingConfig c;
    options->gap_open = c.gap_open;
    options->gap_extend = c.gap_extend;
    options->theta = c.theta;
    options->ldn_threshold = c.ldn_related_threshold;
    options->smoothing = c.smoothing;
    options->refine_iterations = c.refine_iterations;
    options->optimize = 0;
    options->seed = c.seed;
}

lp_status lp_train_pmi(const lp_corpus* corpus, const lp_train_options* options, lp_model** out) {
    return guard([&] {
        need(corpus, "corpus");
        need(out, "out");
        lp_train_options o;
        lp_train_options_default(&o);
        if (options) o = *options;
        TrainingConfig c;
        c.gap_open = o.gap_open;
        c.gap_extend = o.gap_extend;
        c.theta = o.theta;
        c.ldn_related_threshold = o.ldn_threshold;
        c.smoothing = o.smoothing;
        c.refine_iterations = o.refine_iterations;
        c.seed = o.seed;
        *out = new lp_model{train_pmi(corpus->value, c, o.optimize != 0).model};
    });
}

lp_status lp_model_load(const char* path, lp_model** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new lp_model{load_model(path)};
    });
}

lp_status lp_model_save(const lp_model* model, const char* path) {
    return guard([&] {
        need(model, "model");
        need(path, "path");
        save_model(model->value, path);
    });
}

void lp_model_free(lp_model* model) { delete model; }

lp_status lp_model_gaps(const lp_model* model, double* gap_open, double* gap_extend) {
    return guard([&] {
        need(model, "model");
        if (gap_open) *gap_open = model->value.gap_open;
        if (gap_extend) *gap_extend = model->value.gap_extend;
    });
}

lp_status lp_model_score(const lp_model* model, char a, char b, double* out) {
    return guard([&] {
        need(model, "model");
        need(out, "out");
        *out = model->value.score(symbol_of(a), symbol_of(b));
    });
}

lp_status lp_align(const lp_model* model, const char* a, const char* b, double* score, char** gapped_a,
                   char** gapped_b) {
    return guard([&] {
        need(model, "model");
        need(a, "a");
        need(b, "b");
        const auto al = align_pmi(strip_diacritics(a), strip_diacritics(b), model->value);
        if (score) *score = al.score;
        const auto [ra, rb] = al.render();
        if (gapped_a) *gapped_a = dup(ra);
        if (gapped_b) *gapped_b = dup(rb);
    });
}

lp_status lp_distances_compute(const lp_corpus* corpus, const lp_model* model, lp_distances** out) {
    return guard([&] {
        need(corpus, "corpus");
        need(model, "model");
        need(out, "out");
        *out = new lp_distances{distance_matrix(corpus->value, model->value)};
    });
}

lp_status lp_distances_ldn(const lp_corpus* corpus, lp_distances** out) {
    return guard([&] {
        need(corpus, "corpus");
        need(out, "out");
        *out = new lp_distances{ldn_distance_matrix(corpus->value)};
    });
}

lp_status lp_distances_geo(const lp_corpus* corpus, lp_distances** out) {
    return guard([&] {
        need(corpus, "corpus");
        need(out, "out");
        *out = new lp_distances{geo_matrix(corpus->value)};
    });
}

lp_status lp_distances_load(const char* csv_path, lp_distances** out) {
    return guard([&] {
        need(csv_path, "path");
        need(out, "out");
        *out = new lp_distances{load_distance_csv(csv_path)};
    });
}

lp_status lp_distances_save(const lp_distances* d, const char* csv_path) {
    return guard([&] {
        need(d, "distances");
        need(csv_path, "path");
        save_distance_csv(d->value, csv_path);
    });
}

lp_status lp_distances_save_nexus(const lp_distances* d, const char* path) {
    return guard([&] {
        need(d, "distances");
        need(path, "path");
        save_distance_nexus(d->value, path);
    });
}

void lp_distances_free(lp_distances* d) { delete d; }

size_t lp_distances_size(const lp_distances* d) { return d ? d->value.size() : 0; }

lp_status lp_distances_get(const lp_distances* d, size_t i, size_t j, double* out) {
    return guard([&] {
        need(d, "distances");
        need(out, "out");
        if (i >= d->value.size() || j >= d->value.size()) fail(ErrorCode::OutOfRange, "index out of range");
        if (d->value.missing(i, j)) fail(ErrorCode::MissingDistance, "no distance for this pair");
        *out = d->value.at(i, j);
    });
}

lp_status lp_distances_id(const lp_distances* d, size_t i, char** out) {
    return guard([&] {
        need(d, "distances");
        need(out, "out");
        if (i >= d->value.size()) fail(ErrorCode::OutOfRange, "index out of range");
        *out = dup(d->value.ids()[i]);
    });
}

lp_status lp_classifier_train(const char* gold_path, const lp_model* model, unsigned mask, size_t training_pairs,
                              lp_classifier_kind kind, uint64_t seed, const char* out_path) {
    return guard([&] {
        need(gold_path, "gold path");
        need(model, "model");
        need(out_path, "out path");
        if (mask > kAllFeatures) fail(ErrorCode::InvalidArgument, "feature mask out of range");
        GoldIndex gold;
        const auto data = gold_selection(gold_path, model->value, gold);
        const auto cls = train_on_gold(data, mask ? mask : kSelectedFeatures, seed, training_pairs, kind_of(kind));
        std::ofstream out(out_path, std::ios::binary);
        if (!out) fail(ErrorCode::Io, std::string("cannot write ") + out_path);
        write_classifier(cls, out);
    });
}

lp_status lp_model_selection(const char* gold_path, const lp_model* model, size_t splits, size_t training_pairs,
                             lp_classifier_kind kind, uint64_t seed, const char* out_csv, unsigned* best_mask,
                             double* best_f) {
    return guard([&] {
        need(gold_path, "gold path");
        need(model, "model");
        ModelSelectionOptions o;
        o.splits = splits ? splits : o.splits;
        o.training_pairs = training_pairs ? training_pairs : o.training_pairs;
        o.kind = kind_of(kind);
        const auto ranked = model_selection(load_gold(gold_path), model->value, seed, o);
        if (out_csv) {
            std::ofstream out(out_csv, std::ios::binary);
            if (!out) fail(ErrorCode::Io, std::string("cannot write ") + out_csv);
            out << "mask,features,mean_f\n";
            for (const auto& s : ranked) out << s.mask << ',' << mask_names(s.mask) << ',' << format_double(s.mean_f) << '\n';
        }
        if (best_mask) *best_mask = ranked.front().mask;
        if (best_f) *best_f = ranked.front().mean_f;
    });
}

lp_status lp_cluster(const lp_corpus* corpus, const lp_model* model, const lp_distances* d,
                     const char* classifier_path, double threshold, uint64_t seed, const char* out_path) {
    return guard([&] {
        need(corpus, "corpus");
        need(model, "model");
        need(d, "distances");
        need(classifier_path, "classifier path");
        need(out_path, "out path");
        std::ifstream in(classifier_path);
        if (!in) fail(ErrorCode::Io, std::string("cannot open ") + classifier_path);
        const auto cls = read_classifier(in);
        ClusterOptions o;
        o.threshold = threshold;
        o.seed = seed;
        save_cognates(cluster_corpus(corpus->value, model->value, d->value, cls, o), out_path);
    });
}

lp_status lp_bcubed(const char* gold_path, const char* cognates_path, double* precision, double* recall, double* f) {
    return guard([&] {
        need(gold_path, "gold path");
        need(cognates_path, "cognates path");
        // synonyms with identical transcriptions are told apart by occurrence
        std::map<std::string, std::string> gold, predicted;
        std::map<std::string, int> seen;
        for (const auto& r : load_gold(gold_path).records) {
            const auto base = r.doculect_id + '\t' + r.concept_name + '\t' + r.form.raw;
            gold[base + '\t' + std::to_string(seen[base]++)] = r.family + '\t' + r.concept_name + '\t' + r.cognate_class;
        }
        seen.clear();
        for (const auto& a : load_cognates(cognates_path).items) {
            const auto base = a.doculect_id + '\t' + a.concept_name + '\t' + a.transcription;
            predicted[base + '\t' + std::to_string(seen[base]++)] = a.concept_name + '\t' + a.cognate_class;
        }
        const auto b = bcubed_f(gold, predicted);
        if (precision) *precision = b.precision;
        if (recall) *recall = b.recall;
        if (f) *f = b.f;
    });
}

lp_status lp_chars_export(const lp_corpus* corpus, const char* cognates_path, const char* prefix, size_t* cc_count,
                          size_t* sc_count) {
    return guard([&] {
        need(corpus, "corpus");
        need(cognates_path, "cognates path");
        need(prefix, "prefix");
        const std::string p(prefix);
        const auto cc = filter_variable(build_cognate_chars(corpus->value, load_cognates(cognates_path)));
        const auto sc = filter_variable(build_soundclass_chars(corpus->value));
        const auto combined = combine_and_partition(cc, sc);
        save_phylip(combined.matrix, p + ".phy");
        save_partition(combined.partition, p + ".part.txt");
        save_char_nexus(cc, p + ".cc.nex");
        save_char_nexus(sc, p + ".sc.nex");
        if (cc_count) *cc_count = cc.characters().size();
        if (sc_count) *sc_count = sc.characters().size();
    });
}

lp_status lp_bionj(const lp_distances* d, lp_tree** out) {
    return guard([&] {
        need(d, "distances");
        need(out, "out");
        *out = new lp_tree{bionj(d->value)};
    });
}

lp_status lp_tree_parse(const char* newick, lp_tree** out) {
    return guard([&] {
        need(newick, "newick");
        need(out, "out");
        *out = new lp_tree{parse_newick(newick)};
    });
}

lp_status lp_tree_load(const char* path, lp_tree** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new lp_tree{read_newick_file(path)};
    });
}

lp_status lp_tree_save(const lp_tree* tree, const char* path) {
    return guard([&] {
        need(tree, "tree");
        need(path, "path");
        save_newick(tree->value, path);
    });
}

lp_status lp_tree_newick(const lp_tree* tree, char** out) {
    return guard([&] {
        need(tree, "tree");
        need(out, "out");
        *out = dup(write_newick(tree->value));
    });
}

size_t lp_tree_leaf_count(const lp_tree* tree) { return tree ? tree->value.leaf_count() : 0; }

void lp_tree_free(lp_tree* tree) { delete tree; }

lp_status lp_gqd(const lp_tree* inferred, const lp_tree* gold, uint64_t seed, double* value, double* standard_error,
                 uint64_t* resolved_quartets, int* exact) {
    return guard([&] {
        need(inferred, "inferred tree");
        need(gold, "gold tree");
        GqdOptions o;
        o.seed = seed;
        const auto r = gqd(inferred->value, gold->value, o);
        if (value) *value = r.value;
        if (standard_error) *standard_error = r.standard_error;
        if (resolved_quartets) *resolved_quartets = r.resolved_quartets;
        if (exact) *exact = r.exact ? 1 : 0;
    });
}

lp_status lp_mantel(const lp_distances* a, const lp_distances* b, size_t permutations, uint64_t seed, double* r,
                    double* p) {
    return guard([&] {
        need(a, "a");
        need(b, "b");
        const auto m = mantel(a->value, b->value, permutations, seed);
        if (r) *r = m.r;
        if (p) *p = m.p;
    });
}

lp_status lp_correlogram(const lp_distances* geo, const lp_distances* ling, size_t permutations, uint64_t seed,
                         char** csv) {
    return guard([&] {
        need(geo, "geo");
        need(ling, "ling");
        need(csv, "csv");
        const auto bins = mantel_correlogram(geo->value, ling->value, default_correlogram_edges(), permutations, seed);
        std::ostringstream out;
        out << "lower,upper,pairs,empty,r,p,significant\n";
        for (const auto& b : bins)
            out << format_double(b.lower) << ',' << format_double(b.upper) << ',' << b.pairs << ',' << (b.empty ? 1 : 0)
                << ',' << (b.empty ? "" : format_double(b.r)) << ',' << (b.empty ? "" : format_double(b.p)) << ','
                << (b.significant ? 1 : 0) << '\n';
        *csv = dup(out.str());
    });
}

lp_status lp_punctuation(const lp_corpus* corpus, const lp_distances* d, const char* trees_dir,
                         const char* delta_path, double alpha, const char* out_path) {
    return guard([&] {
        need(corpus, "corpus");
        need(d, "distances");
        need(delta_path, "delta path");
        need(out_path, "out path");
        std::map<std::string, Tree> trees;
        if (trees_dir) {
            std::error_code ec;
            for (const auto& e : std::filesystem::directory_iterator(trees_dir, ec)) {
                const auto ext = e.path().extension().string();
                if (ext != ".tre" && ext != ".nwk" && ext != ".newick") continue;
                trees.emplace(e.path().stem().string(), read_newick_file(e.path().string()));
            }
            if (ec) fail(ErrorCode::Io, std::string("cannot list ") + trees_dir + ": " + ec.message());
        }
        std::ifstream din(delta_path);
        if (!din) fail(ErrorCode::Io, std::string("cannot open ") + delta_path);
        PunctuationOptions o;
        o.alpha = alpha;
        const auto rows = punctuation_analysis(corpus->value, d->value, trees, read_delta_flags(din), o);
        std::ofstream out(out_path, std::ios::binary);
        if (!out) fail(ErrorCode::Io, std::string("cannot write ") + out_path);
        write_punctuation_table(rows, out);
    });
}

lp_status lp_pipeline_run(const char* config_path, unsigned threads, char** manifest_json) {
    return guard([&] {
        need(config_path, "config path");
        auto config = load_pipeline_config(config_path);
        if (threads) config.threads = threads;
        const auto m = run_pipeline(config);
        if (manifest_json) *manifest_json = dup(m.json());
    });
}

}  // extern "C"
