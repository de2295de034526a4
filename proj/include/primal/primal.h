/*
 * primal - sense ranking over encyclopedia-style expression/sense corpora.
 *
 * C interface of the shared library. All functions return a status code;
 * on failure primal_last_error() carries a human-readable message for the
 * calling thread. Strings returned through char** are heap-allocated and
 * must be released with primal_string_free().
 */
#ifndef PRIMAL_PRIMAL_H
#define PRIMAL_PRIMAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum primal_status {
  PRIMAL_OK = 0,
  PRIMAL_ERR_IO = 1,       /* missing or unreadable files */
  PRIMAL_ERR_PARSE = 2,    /* malformed input data */
  PRIMAL_ERR_INVALID = 3,  /* invariant or argument violations */
  PRIMAL_ERR_INTERNAL = 4
} primal_status;

typedef struct primal_corpus primal_corpus;
typedef struct primal_model primal_model;

const char* primal_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* primal_last_error(void);

void primal_string_free(char* s);

/* ---- corpus ---------------------------------------------------------- */

/* Loads a JSONL corpus whose records carry a split field. */
primal_status primal_corpus_load(const char* path, primal_corpus** out);

/* Loads three split files (train/validation/test). */
primal_status primal_corpus_load_files(const char* train_path, const char* validation_path,
                                       const char* test_path, primal_corpus** out);

/* Generates a synthetic corpus. spec_json may be NULL or "{}" for defaults. */
primal_status primal_corpus_synth(const char* spec_json, uint64_t seed, primal_corpus** out);

primal_status primal_corpus_save(const primal_corpus* corpus, const char* path);

/* {count, mean_senses, mean_description_length} for one split, as JSON. */
primal_status primal_corpus_stats(const primal_corpus* corpus, const char* split,
                                  char** out_json);

void primal_corpus_free(primal_corpus* corpus);

/* ---- models ---------------------------------------------------------- */

/* model: "umfs" | "skipthought" | "pattern" | "relgraph".
 * config_json: RunConfig fields (profile, embedding_dim, ...); NULL for the
 * desk profile. Returns the trained model and a JSON training log. */
primal_status primal_train(const char* model, const primal_corpus* corpus,
                           const char* config_json, uint64_t seed, primal_model** out,
                           char** out_log_json);

primal_status primal_model_save(const primal_model* model, const char* path);
primal_status primal_model_load(const char* path, primal_model** out);
primal_status primal_model_kind(const primal_model* model, char** out_kind);

/* One JSON record per expression: {expr_id, model, scores, ranks, flagged}. */
primal_status primal_score(const primal_model* model, const primal_corpus* corpus,
                           const char* split, char** out_jsonl);

/* relgraph only: "expr_id,from_sense,to_sense,weight" edge list. */
primal_status primal_relation_graph(const primal_model* model, const primal_corpus* corpus,
                                    const char* split, char** out_csv);

void primal_model_free(primal_model* model);

/* ---- fusion ---------------------------------------------------------- */

/* Fits per-model mean rank, lambda and P@1 weights on a gold-labeled split.
 * model_names/dev_scores_jsonl are parallel arrays of length n_models. */
primal_status primal_fusion_fit(const primal_corpus* corpus, const char* split,
                                const char* const* model_names,
                                const char* const* dev_scores_jsonl, size_t n_models,
                                char** out_config_json);

/* Applies a fitted fusion config to per-model score records. */
primal_status primal_fusion_apply(const char* config_json, const char* const* model_names,
                                  const char* const* scores_jsonl, size_t n_models,
                                  char** out_fused_jsonl);

/* ---- evaluation ------------------------------------------------------ */

/* rankings_jsonl: either score records or fused records. banding_json may be
 * NULL for defaults. Emits the evaluation report as JSON. */
primal_status primal_eval(const primal_corpus* corpus, const char* split,
                          const char* rankings_jsonl, const char* model_name,
                          const char* banding_json, char** out_report_json);

/* Aligned text table (P@1, MAP, Mean Rank) from eval report JSON documents. */
primal_status primal_report_table(const char* const* eval_reports_json, size_t n_reports,
                                  char** out_table);

/* Correct-at-1 intersection counts for >= 2 models on one split. */
primal_status primal_overlap(const primal_corpus* corpus, const char* split,
                             const char* const* model_names,
                             const char* const* scores_jsonl, size_t n_models,
                             char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* PRIMAL_PRIMAL_H */
