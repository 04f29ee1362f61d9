/* Copyright 2026 The judgebias Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the judgebias shared library.
 *
 * The library estimates self-bias and family-bias of LLM judges from rating
 * data: a fixed-effects regression of judge scores on reference scores with
 * heteroskedasticity-robust inference, plus robustness variants, agreement
 * metrics and a synthetic-data generator.
 *
 * All objects are opaque handles created and destroyed by the library. Every
 * fallible function returns a jb_status; on failure jb_last_error() yields a
 * message for the calling thread.
 */

#ifndef JUDGEBIAS_H_
#define JUDGEBIAS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define JB_API __declspec(dllexport)
#else
#define JB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jb_status {
  JB_OK = 0,
  JB_ERR_IO = 1,        /* file missing / unreadable / unwritable */
  JB_ERR_PARSE = 2,     /* malformed input data or config */
  JB_ERR_INVALID = 3,   /* invalid argument or precondition violation */
  JB_ERR_NUMERIC = 4,   /* estimation failure (rank, convergence, ...) */
  JB_ERR_INTERNAL = 5
} jb_status;

typedef struct jb_config jb_config;  /* identities, families, scales */
typedef struct jb_table jb_table;    /* a ratings table */
typedef struct jb_report jb_report;  /* result of one analysis */

/* Library version string ("major.minor.patch"). */
JB_API const char* jb_version(void);

/* Message of the most recent error on this thread; never NULL. */
JB_API const char* jb_last_error(void);

/* ---- config ---------------------------------------------------------- */

JB_API jb_status jb_config_load(const char* path, jb_config** out);
JB_API jb_status jb_config_parse(const char* json_text, jb_config** out);
JB_API void jb_config_free(jb_config* config);

/* ---- tables ---------------------------------------------------------- */

/* Load a CSV/TSV rating file (header: prompt_id,dimension,model,rater,
 * rater_kind,level,token_length[,score]) validated against the config. */
JB_API jb_status jb_table_load(const char* path, const jb_config* config, jb_table** out);

/* Fill reference scores with per-cell means of the human ratings. */
JB_API jb_status jb_table_aggregate_reference(const jb_table* table, jb_table** out);

/* Filter spec is a JSON object with optional keys "dimensions", "task_types",
 * "drop_models", "drop_judges" (each an array of strings). */
JB_API jb_status jb_table_filter(const jb_table* table, const char* filter_json, jb_table** out);

/* Leave-one-family-out reference switch (see jb_fit robustness checks). */
JB_API jb_status jb_table_lofo_reference(const jb_table* table, const char* family,
                                         jb_table** out);

/* Map continuous judge scores to Likert levels 1..num_levels. thresholds may
 * be NULL (equal-width bins) or an ascending array of num_levels-1 cuts. */
JB_API jb_status jb_table_discretize(const jb_table* table, int num_levels,
                                     const double* thresholds, jb_table** out);

/* Canonical CSV export; reloading it reproduces the table exactly. */
JB_API jb_status jb_table_write_csv(const jb_table* table, const char* path);

/* Export the table's identities/families/scales as a config JSON file that
 * jb_config_load accepts (useful after jb_simulate). */
JB_API jb_status jb_table_write_config(const jb_table* table, const char* path);

JB_API jb_status jb_table_num_rows(const jb_table* table, size_t* out);
JB_API void jb_table_free(jb_table* table);

/* ---- synthetic data --------------------------------------------------- */

/* Generate a table from a generative-model config (JSON text). */
JB_API jb_status jb_simulate(const char* sim_config_json, jb_table** out);

/* One panel of the quality-shift suite: panel 0 = judge completions of lower
 * quality, 1 = equal, 2 = higher. */
JB_API jb_status jb_simulate_quality_shift(long num_prompts, uint64_t seed, int panel,
                                           double noise_sd, jb_table** out);

/* ---- analyses --------------------------------------------------------- */

/* Headline bias fit. opts_json may be NULL or a JSON object with optional
 * keys: "cov_type" ("HC0"|"HC1"|"cluster"), "level" (0..1), "include_family"
 * (bool), "dimension_fe" (bool), "coding" ("reference"|"sum_to_zero"),
 * "length_control" (bool), "length_per_judge" (bool). */
JB_API jb_status jb_fit(const jb_table* table, const char* opts_json, jb_report** out);

/* One fit per slice; `by` is "dimension" or "task". */
JB_API jb_status jb_slice(const jb_table* table, const char* by, const char* opts_json,
                          jb_report** out);

/* Robustness checks; `check` is one of "length", "ordinal", "gam", "lofo",
 * "drop-models". opts_json additionally understands "family" (lofo; default:
 * every family with a judge), "drop" (array of model ids), "interior_knots"
 * (gam). */
JB_API jb_status jb_robust(const jb_table* table, const char* check, const char* opts_json,
                           jb_report** out);

/* Annotation-quality metrics; gold may be NULL. */
JB_API jb_status jb_agreement(const jb_table* table, const jb_table* gold, jb_report** out);

/* Per-judge, per-dimension rank correlation with the reference scores. */
JB_API jb_status jb_correlate(const jb_table* table, jb_report** out);

/* Judge x model mean-score matrix with row-normalized companion. */
JB_API jb_status jb_heatmap(const jb_table* table, jb_report** out);

/* Subtract the fitted self-/family-bias point estimates from judge scores. */
JB_API jb_status jb_debias(const jb_table* table, const jb_report* fit, jb_table** out);

/* Parse raw judge transcripts (line-delimited JSON records with keys
 * prompt_id, dimension, model, judge, response_text) into a ratings table.
 * Unparseable records are dropped; *dropped (may be NULL) receives the count.
 * strict=0 accepts near-miss answer labels (edit distance <= 2). */
JB_API jb_status jb_parse_judgments(const char* path, const char* labelmap_path,
                                    const jb_config* config, int strict, size_t* dropped,
                                    jb_table** out);

/* ---- reports ---------------------------------------------------------- */

/* JSON document of the report. The returned buffer is owned by the caller;
 * release it with jb_string_free. */
JB_API jb_status jb_report_to_json(const jb_report* report, char** out_json);
JB_API jb_status jb_report_write_json(const jb_report* report, const char* path);

/* Tidy CSV (plot data): for bias reports one row per (slice, judge-or-family)
 * estimate with interval bounds. */
JB_API jb_status jb_report_write_csv(const jb_report* report, const char* path);

/* Row-normalized companion matrix; only valid for heatmap reports. */
JB_API jb_status jb_report_write_heatmap_row_normalized(const jb_report* report,
                                                        const char* path);

JB_API void jb_report_free(jb_report* report);
JB_API void jb_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* JUDGEBIAS_H_ */
