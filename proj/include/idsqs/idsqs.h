// Copyright 2026 The IDSQS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the IDSQS core.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function (NULL is accepted). Every fallible call returns an
 * idsqs_status; on failure the message is available from idsqs_last_error()
 * on the calling thread until its next failing call. Strings returned through
 * char** out-parameters are owned by the caller and released with
 * idsqs_string_free. File outputs are written as line-delimited JSON (or CSV
 * for *_series / *_scatter), byte-stable for identical inputs.
 */

#ifndef IDSQS_IDSQS_H_
#define IDSQS_IDSQS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(IDSQS_BUILDING_LIBRARY)
#define IDSQS_API __declspec(dllexport)
#else
#define IDSQS_API __declspec(dllimport)
#endif
#else
#define IDSQS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum idsqs_status {
  IDSQS_OK = 0,
  IDSQS_INVALID_ARGUMENT = 1,
  IDSQS_IO = 2,
  IDSQS_MALFORMED_RECORD = 3,
  IDSQS_DANGLING_REFERENCE = 4,
  IDSQS_SCORE_OUT_OF_RANGE = 5,
  IDSQS_DEGENERATE_INPUT = 6,
  IDSQS_RANK_DEFICIENT = 7,
  IDSQS_DOMAIN_ERROR = 8,
  IDSQS_NO_TRAP_QUESTIONS = 9,
  IDSQS_NO_RATINGS = 10,
  IDSQS_MISSING_REFERENCE_MOS = 11,
  IDSQS_DEGENERATE_SAMPLE = 12,
  IDSQS_TOO_FEW_SAMPLES = 13,
  IDSQS_INSUFFICIENT_OVERLAP = 14,
  IDSQS_COVERAGE_GAP = 15,
  IDSQS_NOT_A_TRAP = 16,
  IDSQS_INVALID_MANIFEST = 17,
  IDSQS_STAGE_FAILED = 18,
  IDSQS_SESSION_NOT_FOUND = 19,
  IDSQS_PHASE_VIOLATION = 20,
  IDSQS_OUT_OF_ORDER = 21,
  IDSQS_DUPLICATE_RESPONSE = 22,
  IDSQS_DUPLICATE_SUBJECT = 23,
  IDSQS_INSUFFICIENT_DISPLAY = 24,
  IDSQS_REJECTED = 25,
  IDSQS_INVALID_CONFIG = 26,
  IDSQS_INTERNAL = 99
} idsqs_status;

/* "OK", "ScoreOutOfRange", ... Static storage. */
IDSQS_API const char* idsqs_status_name(idsqs_status status);
/* Message of the calling thread's most recent failure; "" if none. */
IDSQS_API const char* idsqs_last_error(void);
IDSQS_API const char* idsqs_version(void);
IDSQS_API void idsqs_string_free(char* s);

/* ---- Study configuration ---------------------------------------------- */

typedef struct idsqs_config idsqs_config;

/* Default five-source, five-codec, ten-level study in four batches. */
IDSQS_API idsqs_status idsqs_config_generate(uint64_t seed, idsqs_config** out);
IDSQS_API idsqs_status idsqs_config_load(const char* path, idsqs_config** out);
IDSQS_API idsqs_status idsqs_config_save(const idsqs_config* config,
                                         const char* path);
/* Violations as a JSON array of {"kind","subject","detail"}; *count gets the
 * number of violations. Assets are checked when check_assets is nonzero,
 * with relative asset directories resolved against base_dir. */
IDSQS_API idsqs_status idsqs_config_validate(const idsqs_config* config,
                                             const char* base_dir,
                                             int check_assets,
                                             char** violations_json,
                                             size_t* count);
IDSQS_API void idsqs_config_free(idsqs_config* config);

/* ---- Rating tables ---------------------------------------------------- */

typedef struct idsqs_table idsqs_table;

/* config may be NULL when the file carries its question/batch records. */
IDSQS_API idsqs_status idsqs_table_load(const char* path,
                                        const idsqs_config* config,
                                        idsqs_table** out);
IDSQS_API idsqs_status idsqs_table_save(const idsqs_table* table,
                                        const char* path);
IDSQS_API idsqs_status idsqs_table_counts(const idsqs_table* table,
                                          size_t* ratings, size_t* instances,
                                          size_t* subjects, size_t* questions);
IDSQS_API void idsqs_table_free(idsqs_table* table);

/* ---- Simulation ------------------------------------------------------- */

typedef struct idsqs_truth idsqs_truth;

typedef struct idsqs_population {
  int diligent;
  int random_clickers;
  double bias_sd;
  double residual_sd_lo;
  double residual_sd_hi;
  int batches_per_subject;
} idsqs_population;

IDSQS_API void idsqs_population_default(idsqs_population* population);
/* Draws a ground truth and simulated ratings for it from one seed. */
IDSQS_API idsqs_status idsqs_simulate(const idsqs_config* config,
                                      const idsqs_population* population,
                                      uint64_t seed, idsqs_table** table,
                                      idsqs_truth** truth);
IDSQS_API idsqs_status idsqs_truth_save(const idsqs_truth* truth,
                                        const char* path);
IDSQS_API idsqs_status idsqs_truth_load(const char* path, idsqs_truth** out);
IDSQS_API void idsqs_truth_free(idsqs_truth* truth);

/* ---- Screening -------------------------------------------------------- */

typedef struct idsqs_cleansing idsqs_cleansing;
typedef struct idsqs_outliers idsqs_outliers;

IDSQS_API idsqs_status idsqs_cleanse(const idsqs_table* table, int bins,
                                     idsqs_cleansing** out);
IDSQS_API idsqs_status idsqs_cleansing_info(const idsqs_cleansing* report,
                                            double* threshold, size_t* kept,
                                            size_t* discarded);
/* New table holding only the kept batch instances. */
IDSQS_API idsqs_status idsqs_cleansing_apply(const idsqs_cleansing* report,
                                             const idsqs_table* table,
                                             idsqs_table** out);
IDSQS_API idsqs_status idsqs_cleansing_write(const idsqs_cleansing* report,
                                             const char* path);
IDSQS_API void idsqs_cleansing_free(idsqs_cleansing* report);

/* Screens every instance present in `table`. */
IDSQS_API idsqs_status idsqs_remove_outliers(const idsqs_table* table,
                                             idsqs_outliers** out);
IDSQS_API idsqs_status idsqs_outliers_info(const idsqs_outliers* report,
                                           double* cutoff, size_t* kept,
                                           size_t* removed);
IDSQS_API idsqs_status idsqs_outliers_apply(const idsqs_outliers* report,
                                            const idsqs_table* table,
                                            idsqs_table** out);
IDSQS_API idsqs_status idsqs_outliers_write(const idsqs_outliers* report,
                                            const char* path);
IDSQS_API void idsqs_outliers_free(idsqs_outliers* report);

/* ---- Reconstruction --------------------------------------------------- */

typedef struct idsqs_reconstruction idsqs_reconstruction;
typedef struct idsqs_dmos idsqs_dmos;
typedef struct idsqs_bootstrap idsqs_bootstrap;

IDSQS_API idsqs_status idsqs_reconstruct(const idsqs_table* table,
                                         double epsilon, int max_iter,
                                         idsqs_reconstruction** out);
IDSQS_API idsqs_status idsqs_reconstruction_info(
    const idsqs_reconstruction* result, int* iterations, int* converged,
    double* final_delta);
IDSQS_API idsqs_status idsqs_reconstruction_write(
    const idsqs_reconstruction* result, const char* path);
/* Recovery against a simulation's truth: RMSE, PLCC, bias correlation. */
IDSQS_API idsqs_status idsqs_reconstruction_recovery(
    const idsqs_reconstruction* result, const idsqs_truth* truth,
    const idsqs_table* table, double* rmse, double* plcc, double* bias_corr);
IDSQS_API void idsqs_reconstruction_free(idsqs_reconstruction* result);

IDSQS_API idsqs_status idsqs_dmos_compute(const idsqs_reconstruction* result,
                                          const idsqs_table* table,
                                          idsqs_dmos** out);
IDSQS_API idsqs_status idsqs_dmos_load(const char* path, idsqs_dmos** out);
IDSQS_API idsqs_status idsqs_dmos_write(const idsqs_dmos* dmos,
                                        const char* path);
IDSQS_API size_t idsqs_dmos_count(const idsqs_dmos* dmos);
/* Plot-ready CSV; `ci` may be NULL. */
IDSQS_API idsqs_status idsqs_dmos_write_series(const idsqs_dmos* dmos,
                                               const idsqs_bootstrap* ci,
                                               const char* path);
IDSQS_API void idsqs_dmos_free(idsqs_dmos* dmos);

/* threads == 0 uses every hardware thread; results do not depend on it. */
IDSQS_API idsqs_status idsqs_bootstrap_run(const idsqs_table* table,
                                           int replicates, double level,
                                           uint64_t seed, unsigned threads,
                                           idsqs_bootstrap** out);
IDSQS_API idsqs_status idsqs_bootstrap_write(const idsqs_bootstrap* ci,
                                             const char* path);
IDSQS_API void idsqs_bootstrap_free(idsqs_bootstrap* ci);

/* ---- Distribution fits ------------------------------------------------ */

typedef struct idsqs_fits idsqs_fits;

IDSQS_API idsqs_status idsqs_fit_beta_all(const idsqs_table* table,
                                          double significance,
                                          idsqs_fits** out);
IDSQS_API idsqs_status idsqs_fits_info(const idsqs_fits* fits, int* fitted,
                                       int* tested, int* passed);
IDSQS_API idsqs_status idsqs_fits_write(const idsqs_fits* fits,
                                        const char* path);
IDSQS_API idsqs_status idsqs_fits_write_scatter(const idsqs_fits* fits,
                                                const char* path);
IDSQS_API void idsqs_fits_free(idsqs_fits* fits);

/* Maximum-likelihood Beta fit of scores in [0, 100]. */
IDSQS_API idsqs_status idsqs_fit_beta(const double* scores, size_t n,
                                      double* alpha, double* beta);

/* ---- Alignment -------------------------------------------------------- */

typedef struct idsqs_jnd idsqs_jnd;
typedef struct idsqs_alignment idsqs_alignment;

IDSQS_API idsqs_status idsqs_jnd_load(const char* path, idsqs_jnd** out);
IDSQS_API void idsqs_jnd_free(idsqs_jnd* jnd);

/* grouping: "per-source", "pooled" or "pooled-per-source-mapping". */
IDSQS_API idsqs_status idsqs_align(const idsqs_dmos* dmos, const idsqs_jnd* jnd,
                                   const char* grouping, idsqs_alignment** out);
/* Mapped-vs-JND correlations of one group ("All" when pooled). */
IDSQS_API idsqs_status idsqs_alignment_group(const idsqs_alignment* report,
                                             const char* group, double* plcc,
                                             double* srocc,
                                             double* kendall_tau);
IDSQS_API idsqs_status idsqs_alignment_write(const idsqs_alignment* report,
                                             const char* path);
IDSQS_API idsqs_status idsqs_alignment_write_scatter(
    const idsqs_alignment* report, const char* path);
IDSQS_API void idsqs_alignment_free(idsqs_alignment* report);

/* ---- Reports ---------------------------------------------------------- */

/* Human-readable one-paragraph summaries. */
IDSQS_API idsqs_status idsqs_cleansing_summary(const idsqs_cleansing* r,
                                               char** out);
IDSQS_API idsqs_status idsqs_outliers_summary(const idsqs_outliers* r,
                                              char** out);
IDSQS_API idsqs_status idsqs_reconstruction_summary(
    const idsqs_reconstruction* r, char** out);
IDSQS_API idsqs_status idsqs_bootstrap_summary(const idsqs_bootstrap* r,
                                               char** out);
IDSQS_API idsqs_status idsqs_fits_summary(const idsqs_fits* r, char** out);
IDSQS_API idsqs_status idsqs_alignment_summary(const idsqs_alignment* r,
                                               char** out);

/* Runs a manifest end to end and writes its report bundle. The combined
 * summary text goes to *summary when it is not NULL. */
IDSQS_API idsqs_status idsqs_pipeline_run(const char* manifest_path,
                                          char** summary);

/* ---- Correlation and thresholds --------------------------------------- */

IDSQS_API idsqs_status idsqs_pearson(const double* x, const double* y,
                                     size_t n, double* out);
IDSQS_API idsqs_status idsqs_spearman(const double* x, const double* y,
                                      size_t n, double* out);
IDSQS_API idsqs_status idsqs_kendall_tau_b(const double* x, const double* y,
                                           size_t n, double* out);
IDSQS_API idsqs_status idsqs_otsu_threshold(const double* values, size_t n,
                                            int bins, double* out);

/* ---- Study service ---------------------------------------------------- */

typedef struct idsqs_service idsqs_service;

/* Opens the event log at log_path (created if missing) and replays it.
 * has_seed == 0 draws a random seed for a new log. */
IDSQS_API idsqs_status idsqs_service_open(const idsqs_config* config,
                                          const char* log_path, int has_seed,
                                          uint64_t seed, idsqs_service** out);
/* JSON in, JSON out; on failure *out (if not NULL) receives the error body
 * {"error":{"code","status","message","detail"}}. */
IDSQS_API idsqs_status idsqs_service_create_session(idsqs_service* service,
                                                    const char* subject_id,
                                                    const char* client_json,
                                                    char** out);
IDSQS_API idsqs_status idsqs_service_next(idsqs_service* service,
                                          const char* session_id, char** out);
IDSQS_API idsqs_status idsqs_service_submit(idsqs_service* service,
                                            const char* session_id,
                                            const char* response_json,
                                            char** out);
IDSQS_API idsqs_status idsqs_service_gate(idsqs_service* service,
                                          const char* session_id,
                                          const char* gate,
                                          const char* payload_json, char** out);
IDSQS_API idsqs_status idsqs_service_export(idsqs_service* service,
                                            const char* study_id,
                                            int include_partial, char** out);
/* Serves the HTTP API until the process is interrupted. Relative asset
 * directories resolve against base_dir. */
IDSQS_API idsqs_status idsqs_service_serve(idsqs_service* service,
                                           const char* base_dir,
                                           const char* host, int port);
IDSQS_API void idsqs_service_free(idsqs_service* service);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* IDSQS_IDSQS_H_ */
