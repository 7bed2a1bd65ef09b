#ifndef WSCONF_WSCONF_H
#define WSCONF_WSCONF_H

/* C interface to libwsconf. Every call returns a wsc_status; on failure the
 * message is available from wsc_last_error() on the same thread until the
 * next failing call. Labels, items and nodes are 0-based here; files use
 * 1-based ids. Strings returned through char** are owned by the caller and
 * released with wsc_string_free. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define WSC_API __declspec(dllexport)
#else
#define WSC_API __attribute__((visibility("default")))
#endif

typedef enum wsc_status {
  WSC_OK = 0,
  WSC_ERR_INVALID_ARGUMENT = 1,
  WSC_ERR_PARSE = 2,
  WSC_ERR_IO = 3,
  WSC_ERR_INFEASIBLE = 4,
  WSC_ERR_LIMIT_EXCEEDED = 5,
  WSC_ERR_INCONSISTENT_DATA = 6,
  WSC_ERR_UNSUPPORTED = 7,
  WSC_ERR_INTERNAL = 8
} wsc_status;

WSC_API const char* wsc_last_error(void);
WSC_API const char* wsc_status_name(wsc_status s);
WSC_API const char* wsc_version(void);
WSC_API void wsc_string_free(char* s);

/* ---- thresholds ---- */

/* k = ceil((n + 1)(1 - alpha)); *t_hat is +inf when k > n. */
WSC_API wsc_status wsc_conformal_threshold(const double* scores, size_t n, double alpha,
                                           double* t_hat, size_t* order_index);
/* Same rule on a file with one score per line. n_out may be NULL. */
WSC_API wsc_status wsc_calibrate_file(const char* path, double alpha, double* t_hat,
                                      size_t* order_index, size_t* n_out);
/* Q = ceil((n + 1)(1 - alpha))-th smallest of ranks[i] - offsets[i];
 * offsets may be NULL. *infinite is set when the order index exceeds n. */
WSC_API wsc_status wsc_rank_conformalize(const int64_t* ranks, const int64_t* offsets, size_t n,
                                         double alpha, int64_t* q_hat, int* infinite);

/* ---- discrete weak-label distributions and greedy sets ---- */

typedef struct wsc_distribution wsc_distribution;

/* {"k": K, "atoms": [{"set": [1-based ids], "p": p}, ...]} */
WSC_API wsc_status wsc_distribution_from_json(const char* json, wsc_distribution** out);
/* Independent label memberships, conditioned on a nonempty set. */
WSC_API wsc_status wsc_distribution_label_independent(const double* marginals, int k,
                                                      wsc_distribution** out);
WSC_API void wsc_distribution_free(wsc_distribution* d);
WSC_API int wsc_distribution_k(const wsc_distribution* d);

/* Greedy order (k labels) and cumulative coverage c_1..c_K. Either output
 * may be NULL. */
WSC_API wsc_status wsc_greedy_sequence(const wsc_distribution* d, int* order,
                                       double* cum_coverage);
/* Randomized set: inner with probability t, otherwise outer. Masks use bit y
 * for label y. */
WSC_API wsc_status wsc_greedy_set(const wsc_distribution* d, double eta, uint64_t* inner,
                                  uint64_t* outer, double* t, double* expected_size);
/* Size-optimal randomized set by exhaustive search (K <= 20). */
WSC_API wsc_status wsc_optimal_set(const wsc_distribution* d, double eta, double* expected_size,
                                   uint64_t* low, uint64_t* high, double* weight_high);
WSC_API wsc_status wsc_min_deterministic_cover(const wsc_distribution* d, double eta, int* size);
WSC_API wsc_status wsc_wolsey_constant(const wsc_distribution* d, double eta, double* constant);
/* 0 label-independent, 1 tree, 2 general. */
WSC_API wsc_status wsc_check_structure(const wsc_distribution* d, int* structure);
WSC_API wsc_status wsc_nested_score(const wsc_distribution* d, int label, double u,
                                    double* score);

/* ---- M-best enumeration over rankings and matchings ---- */

typedef enum wsc_psi { WSC_PSI_HINGE = 0, WSC_PSI_EXP = 1 } wsc_psi;

typedef struct wsc_mbest wsc_mbest;

WSC_API wsc_status wsc_mbest_ranking(const double* relevance, int k, wsc_psi psi, double c,
                                     wsc_mbest** out);
/* Row-major k x k costs. With translated != 0 scores are cost minus the
 * minimum cost. */
WSC_API wsc_status wsc_mbest_matching(const double* costs, int k, int translated,
                                      wsc_mbest** out);
WSC_API void wsc_mbest_free(wsc_mbest* e);
WSC_API int wsc_mbest_k(const wsc_mbest* e);
/* Extends the enumeration to at least m configurations or exhaustion. */
WSC_API wsc_status wsc_mbest_grow(wsc_mbest* e, size_t m);
/* Enumerates every configuration with score <= threshold (doubling), up to
 * cap. *count gets the number within the threshold (at most cap). */
WSC_API wsc_status wsc_mbest_until(wsc_mbest* e, double threshold, size_t cap, size_t* count,
                                   int* truncated);
WSC_API size_t wsc_mbest_count(const wsc_mbest* e);
WSC_API int wsc_mbest_exhausted(const wsc_mbest* e);
/* Configuration i (0-based, i < count): ranking = items by rank, matching =
 * right node of each left node. config needs k slots; score may be NULL. */
WSC_API wsc_status wsc_mbest_config(const wsc_mbest* e, size_t i, int* config, double* score);

/* Minimum-cost perfect assignment of a row-major k x k matrix. */
WSC_API wsc_status wsc_hungarian(const double* costs, int k, int* assignment, double* cost);

/* ---- instance files ---- */

typedef struct wsc_instances wsc_instances;

/* task "rank": CSV rows of relevances; task "match": cost matrices (CSV
 * blocks or JSON). */
WSC_API wsc_status wsc_instances_read(const char* task, const char* path, wsc_instances** out);
WSC_API void wsc_instances_free(wsc_instances* s);
WSC_API size_t wsc_instances_count(const wsc_instances* s);
WSC_API wsc_status wsc_instances_mbest(const wsc_instances* s, size_t i, wsc_psi psi, double c,
                                       int translated, wsc_mbest** out);

/* ---- datasets, evaluation, experiments ---- */

/* Coverage report of prediction sets against labelled records, as JSON. */
WSC_API wsc_status wsc_eval_files(const char* sets_path, const char* records_path,
                                  char** report_json);
/* Writes the dataset of one trial of an experiment config (JSON text) to
 * path as JSON lines. */
WSC_API wsc_status wsc_generate(const char* config_json, size_t trial, const char* path,
                                size_t* n_written);
/* Runs the experiment. When the config has "out", rows are appended to
 * <out>.csv and <out>.jsonl. results_json (may be NULL) gets
 * {"meta": ..., "results": [...]}. */
WSC_API wsc_status wsc_run_experiment(const char* config_json, char** results_json);
/* Fills defaults and validates; canonical_json gets the full config. */
WSC_API wsc_status wsc_config_check(const char* config_json, char** canonical_json);

#ifdef __cplusplus
}
#endif

#endif
