// Copyright 2026 The greenjudge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/*
 * C interface to greenjudge. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every fallible call
 * returns a gj_status; on failure gj_last_error() describes the problem for
 * the calling thread. Strings returned through char** out-parameters are
 * heap-allocated and must be released with gj_string_free().
 */
#ifndef GREENJUDGE_GREENJUDGE_H_
#define GREENJUDGE_GREENJUDGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(GREENJUDGE_BUILDING_LIBRARY)
#define GJ_API __declspec(dllexport)
#else
#define GJ_API __declspec(dllimport)
#endif
#else
#define GJ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gj_status {
  GJ_OK = 0,
  GJ_PARSE_ERROR = 1,
  GJ_DUPLICATE_KEY = 2,
  GJ_EMPTY_TEXT = 3,
  GJ_INSUFFICIENT_POPULATION = 4,
  GJ_INVALID_SPEC = 5,
  GJ_AUTH_ERROR = 6,
  GJ_RATE_LIMITED = 7,
  GJ_PROVIDER_ERROR = 8,
  GJ_TIMEOUT = 9,
  GJ_CONFIG_MISMATCH = 10,
  GJ_SELF_COMPARISON = 11,
  GJ_NO_LOGPROBS = 12,
  GJ_NO_DIGIT_MASS = 13,
  GJ_EMPTY_MASS = 14,
  GJ_UNPARSEABLE_VERDICT = 15,
  GJ_INSUFFICIENT_POOL = 16,
  GJ_OUT_OF_RANGE = 17,
  GJ_BIN_MISMATCH = 18,
  GJ_EMPTY_INPUT = 19,
  GJ_DEGENERATE_INPUT = 20,
  GJ_GENERATION_FAILURE = 21,
  GJ_ID_MISMATCH = 22,
  GJ_CONFIG_ERROR = 23,
  GJ_IO_ERROR = 24,
  GJ_INVALID_ARGUMENT = 25,
  GJ_CANCELLED = 26,
  GJ_INTERNAL = 27
} gj_status;

typedef struct gj_corpus gj_corpus;
typedef struct gj_backend gj_backend;

typedef struct gj_separation_report {
  double tvd;
  double ks;
  double emd_normalized;
  size_t n_a;
  size_t n_b;
} gj_separation_report;

GJ_API const char* gj_version(void);
GJ_API const char* gj_status_name(gj_status status);
/* Message of the most recent failure on this thread; "" if none. */
GJ_API const char* gj_last_error(void);
GJ_API void gj_string_free(char* s);
/* Process exit code for a status: 0 ok, 2 config, 3 provider, 1 internal. */
GJ_API int gj_exit_code(gj_status status);

/* Corpus. format is "csv", "jsonl", or NULL to infer from the extension. */
GJ_API gj_status gj_corpus_load(const char* path, const char* format, gj_corpus** out);
GJ_API gj_status gj_corpus_synthesize(size_t high, size_t low, uint64_t seed, gj_corpus** out);
GJ_API gj_status gj_corpus_save(const gj_corpus* corpus, const char* path, const char* format);
GJ_API gj_status gj_corpus_sample_non_a_list(const gj_corpus* corpus, size_t n, uint64_t seed, gj_corpus** out);
GJ_API gj_status gj_corpus_combine_questions(const gj_corpus* corpus, gj_corpus** out);
GJ_API size_t gj_corpus_size(const gj_corpus* corpus);
GJ_API size_t gj_corpus_count_a_list(const gj_corpus* corpus);
GJ_API void gj_corpus_free(gj_corpus* corpus);

/*
 * Backend stack (provider, rate limiter, response cache) from a JSON config,
 * e.g. {"kind":"mock"} or {"kind":"openai","cache_dir":"cache"}.
 */
GJ_API gj_status gj_backend_create(const char* config_json, gj_backend** out);
/* {"model_id", "requests", "cache_hits", "provider_calls", ...} */
GJ_API gj_status gj_backend_stats_json(const gj_backend* backend, char** out_json);
GJ_API void gj_backend_free(gj_backend* backend);

/*
 * Judge options (all optional), as a JSON object:
 *   max_in_flight, both_orders, allow_fallback, reference_examples (path),
 *   reference_seed, template_dir, fail_fast
 */

/*
 * Renders the messages for a judge variant ("rating.one.scale", "pairwise.cot")
 * or a greenwash prompt ("greenwash.fixed_accuracy") for the response at
 * index; pairwise variants use opponent_index for slot B. Output is a JSON
 * array of {"role", "content"}.
 */
GJ_API gj_status gj_prompt_render(const char* variant, const gj_corpus* corpus, size_t index, size_t opponent_index,
                                  const char* options_json, char** out_json);

/*
 * Scores every response. out_scores receives score JSONL; out_errors (may be
 * NULL) receives one JSON line per failed item. Auth failures, and provider
 * failures of every item, fail the whole call instead.
 */
GJ_API gj_status gj_judge_rate(gj_backend* backend, const gj_corpus* corpus, const char* variant,
                               const char* options_json, char** out_scores, char** out_errors,
                               size_t* out_failed);
/* Expected win rate over k opponents drawn from pool (NULL: candidates). */
GJ_API gj_status gj_judge_pairwise(gj_backend* backend, const gj_corpus* candidates, const gj_corpus* pool,
                                   const char* variant, size_t k, uint64_t seed, const char* options_json,
                                   char** out_scores, char** out_errors, size_t* out_failed);

/* mass[i] is the probability of digit i + 1. */
GJ_API gj_status gj_weighted_rating(const double mass[5], double* out);
GJ_API gj_status gj_expected_win_rate(const double* p_wins, size_t n, double* out);
GJ_API gj_status gj_histogram(const double* scores, size_t n, double lo, double hi, size_t bins, double* out_bins);
GJ_API gj_status gj_separation(const double* a, size_t n_a, const double* b, size_t n_b, double lo, double hi,
                               size_t bins, int ks_binned, gj_separation_report* out);
/*
 * Separation between two score files. hist_csv_path (may be NULL) receives
 * the per-bin shares of both populations.
 */
GJ_API gj_status gj_separation_files(const char* a_scores_path, const char* b_scores_path, double lo, double hi,
                                     size_t bins, int ks_binned, const char* hist_csv_path, char** out_json);

/*
 * Rewrites a seeded sample of n non-A-List responses under a regime
 * ("unconstrained", "fixed_accuracy", "fixed_accuracy_and_length").
 * out_variants is a corpus-compatible JSONL file body.
 */
GJ_API gj_status gj_greenwash_generate(gj_backend* backend, const gj_corpus* corpus, const char* regime, size_t n,
                                       uint64_t seed, const char* options_json, char** out_variants,
                                       char** out_summary_json);
/*
 * Delta summary and separation against the A-List for one scored variant
 * set. variants_path (may be NULL) supplies length ratios.
 */
GJ_API gj_status gj_greenwash_report(const char* originals_scores_path, const char* variants_scores_path,
                                     const char* alist_scores_path, const char* variants_path, size_t bins,
                                     char** out_json);
/* Length-doubling control with a rating variant; out_csv holds per-item pairs. */
GJ_API gj_status gj_greenwash_double(gj_backend* backend, const gj_corpus* corpus, const char* variant,
                                     const char* options_json, char** out_csv, char** out_summary_json);
/* Least-squares slope of delta on length ratio, per 10% length increase. */
GJ_API gj_status gj_length_delta_regression(const double* length_ratios, const double* deltas, size_t n,
                                            double* out_slope);

/*
 * Runs an experiment config into output_dir. backend_kind (may be NULL)
 * overrides the config's backend kind, e.g. "mock".
 */
GJ_API gj_status gj_experiment_run(const char* config_path, const char* output_dir, const char* backend_kind,
                                   char** out_manifest_json, size_t* out_item_failures);
GJ_API gj_status gj_experiment_validate(const char* config_path, const char* backend_kind);

#ifdef __cplusplus
}
#endif

#endif /* GREENJUDGE_GREENJUDGE_H_ */
