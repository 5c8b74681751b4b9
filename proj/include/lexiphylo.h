#ifndef LEXIPHYLO_H
#define LEXIPHYLO_H

/* C interface to the lexiphylo core. Every call returns an lp_status; on
 * failure lp_last_error() holds the message for the calling thread.
 * Strings returned through char** are owned by the caller (lp_string_free). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LEXIPHYLO_BUILDING)
#    define LP_API __declspec(dllexport)
#  else
#    define LP_API __declspec(dllimport)
#  endif
#else
#  define LP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lp_status {
    LP_OK = 0,
    LP_INVALID_ARGUMENT,
    LP_IO,
    LP_PARSE_ERROR,
    LP_UNKNOWN_SYMBOL,
    LP_EMPTY_FORM,
    LP_DUPLICATE_DOCULECT,
    LP_UNKNOWN_CONCEPT,
    LP_EMPTY_CORPUS,
    LP_NO_ALIGNED_PAIRS,
    LP_NO_PAIRS_ABOVE_THETA,
    LP_MAX_EVALUATIONS_EXCEEDED,
    LP_EMPTY_LIST,
    LP_NO_SHARED_CONCEPTS,
    LP_UNDEFINED_CONCEPT,
    LP_MISSING_DISTANCE,
    LP_DEGENERATE_LABELS,
    LP_ITEM_SET_MISMATCH,
    LP_INSUFFICIENT_FAMILIES,
    LP_TAXA_MISMATCH,
    LP_NAME_COLLISION,
    LP_SYNTAX_ERROR,
    LP_MISSING_ENTRIES,
    LP_TOO_FEW_TAXA,
    LP_LEAF_NOT_FOUND,
    LP_NO_CANDIDATE,
    LP_NO_RESOLVED_QUARTETS,
    LP_UNROOTED_TREE,
    LP_OUT_OF_RANGE,
    LP_ZERO_VECTOR,
    LP_SIZE_MISMATCH,
    LP_SINGULAR_COVARIANCE,
    LP_STAGE_FAILURE,
    LP_INTERNAL = 99
} lp_status;

typedef struct lp_corpus lp_corpus;
typedef struct lp_model lp_model;
typedef struct lp_distances lp_distances;
typedef struct lp_tree lp_tree;

LP_API const char* lp_version(void);
LP_API const char* lp_status_name(lp_status status);
LP_API const char* lp_last_error(void);
LP_API void lp_string_free(char* s);
/* 0 restores the default (LEXIPHYLO_THREADS, else all cores). */
LP_API lp_status lp_set_threads(unsigned n);

/* corpus */
LP_API lp_status lp_corpus_load(const char* path, int exclude_nonnatural, lp_corpus** out);
LP_API void lp_corpus_free(lp_corpus* corpus);
LP_API size_t lp_corpus_size(const lp_corpus* corpus);
LP_API lp_status lp_corpus_doculect_id(const lp_corpus* corpus, size_t i, char** out);

/* PMI training and alignment */
typedef struct lp_train_options {
    double gap_open;
    double gap_extend;
    double theta;
    double ldn_threshold;
    double smoothing;
    int refine_iterations;
    int optimize;
    uint64_t seed;
} lp_train_options;

LP_API void lp_train_options_default(lp_train_options* options);
LP_API lp_status lp_train_pmi(const lp_corpus* corpus, const lp_train_options* options, lp_model** out);
LP_API lp_status lp_model_load(const char* path, lp_model** out);
LP_API lp_status lp_model_save(const lp_model* model, const char* path);
LP_API void lp_model_free(lp_model* model);
LP_API lp_status lp_model_gaps(const lp_model* model, double* gap_open, double* gap_extend);
LP_API lp_status lp_model_score(const lp_model* model, char a, char b, double* out);
LP_API lp_status lp_align(const lp_model* model, const char* a, const char* b, double* score,
                          char** gapped_a, char** gapped_b);

/* distances */
LP_API lp_status lp_distances_compute(const lp_corpus* corpus, const lp_model* model, lp_distances** out);
LP_API lp_status lp_distances_ldn(const lp_corpus* corpus, lp_distances** out);
LP_API lp_status lp_distances_geo(const lp_corpus* corpus, lp_distances** out);
LP_API lp_status lp_distances_load(const char* csv_path, lp_distances** out);
LP_API lp_status lp_distances_save(const lp_distances* d, const char* csv_path);
LP_API lp_status lp_distances_save_nexus(const lp_distances* d, const char* path);
LP_API void lp_distances_free(lp_distances* d);
LP_API size_t lp_distances_size(const lp_distances* d);
/* LP_MISSING_DISTANCE for masked cells. */
LP_API lp_status lp_distances_get(const lp_distances* d, size_t i, size_t j, double* out);
LP_API lp_status lp_distances_id(const lp_distances* d, size_t i, char** out);

/* cognate clustering */
typedef enum lp_classifier_kind { LP_CLASSIFIER_SVM = 0, LP_CLASSIFIER_LOGISTIC = 1 } lp_classifier_kind;

/* mask 0 selects the default feature subset. */
LP_API lp_status lp_classifier_train(const char* gold_path, const lp_model* model, unsigned mask,
                                     size_t training_pairs, lp_classifier_kind kind, uint64_t seed,
                                     const char* out_path);
/* Writes "mask,features,mean_f" ranked best first. */
LP_API lp_status lp_model_selection(const char* gold_path, const lp_model* model, size_t splits,
                                    size_t training_pairs, lp_classifier_kind kind, uint64_t seed,
                                    const char* out_csv, unsigned* best_mask, double* best_f);
LP_API lp_status lp_cluster(const lp_corpus* corpus, const lp_model* model, const lp_distances* d,
                            const char* classifier_path, double threshold, uint64_t seed,
                            const char* out_path);
/* B-cubed F of a predicted cognate CSV against a gold CSV. */
LP_API lp_status lp_bcubed(const char* gold_path, const char* cognates_path, double* precision,
                           double* recall, double* f);

/* characters: writes <prefix>.phy, <prefix>.part.txt, <prefix>.cc.nex, <prefix>.sc.nex */
LP_API lp_status lp_chars_export(const lp_corpus* corpus, const char* cognates_path, const char* prefix,
                                 size_t* cc_count, size_t* sc_count);

/* trees */
LP_API lp_status lp_bionj(const lp_distances* d, lp_tree** out);
LP_API lp_status lp_tree_parse(const char* newick, lp_tree** out);
LP_API lp_status lp_tree_load(const char* path, lp_tree** out);
LP_API lp_status lp_tree_save(const lp_tree* tree, const char* path);
LP_API lp_status lp_tree_newick(const lp_tree* tree, char** out);
LP_API size_t lp_tree_leaf_count(const lp_tree* tree);
LP_API void lp_tree_free(lp_tree* tree);
LP_API lp_status lp_gqd(const lp_tree* inferred, const lp_tree* gold, uint64_t seed, double* value,
                        double* standard_error, uint64_t* resolved_quartets, int* exact);

/* statistics */
LP_API lp_status lp_mantel(const lp_distances* a, const lp_distances* b, size_t permutations, uint64_t seed,
                           double* r, double* p);
/* CSV: lower,upper,pairs,empty,r,p,significant */
LP_API lp_status lp_correlogram(const lp_distances* geo, const lp_distances* ling, size_t permutations,
                                uint64_t seed, char** csv);
/* trees_dir holds <family>.tre files (may be NULL); result table written to out_path. */
LP_API lp_status lp_punctuation(const lp_corpus* corpus, const lp_distances* d, const char* trees_dir,
                                const char* delta_path, double alpha, const char* out_path);

/* pipeline */
/* threads 0 keeps the config's setting. */
LP_API lp_status lp_pipeline_run(const char* config_path, unsigned threads, char** manifest_json);

#ifdef __cplusplus
}
#endif

#endif
