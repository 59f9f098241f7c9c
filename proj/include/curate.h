/* Copyright the curate authors. Licensed under the Apache 2.0 license.
 * See LICENSE in the project root.
 *
 * C API of the curate shared library. All functions return a status code;
 * rich objects travel as opaque handles that must be released with the
 * matching *_free call. curate_last_error() describes the most recent
 * failure on the calling thread.
 */
#ifndef CURATE_H
#define CURATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CURATE_API __declspec(dllexport)
#else
#define CURATE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum curate_status {
  CURATE_OK = 0,
  CURATE_ERROR = 1,            /* internal/unclassified failure */
  CURATE_REJECTED = 2,         /* decision rule said no */
  CURATE_VALIDATION_FAILED = 3,
  CURATE_REVIEW_INCOMPLETE = 4, /* awaiting or malformed verdicts */
  CURATE_INVALID_ARGUMENT = 5,
  CURATE_DOMAIN_ERROR = 6,
  CURATE_DIMENSION_MISMATCH = 7,
  CURATE_FORMAT_MISMATCH = 8,
  CURATE_STALE_DELTA = 9,
  CURATE_EDIT_CONFLICT = 10,
  CURATE_EMPTY_PROPOSAL = 11,
  CURATE_STALE_REVIEW = 12,
  CURATE_NUMERIC_ERROR = 13,
  CURATE_IO_ERROR = 14
} curate_status;

typedef enum curate_format {
  CURATE_FORMAT_TABLE = 0,
  CURATE_FORMAT_INDEXED = 1,
  CURATE_FORMAT_SEQ = 2
} curate_format;

CURATE_API const char* curate_version(void);
CURATE_API const char* curate_status_name(curate_status status);
/* Message for the last failing call on this thread; empty if none. */
CURATE_API const char* curate_last_error(void);

/* ---- data states and edit sets ---- */

typedef struct curate_state curate_state;
typedef struct curate_editset curate_editset;
typedef struct curate_report curate_report;

CURATE_API curate_status curate_state_load(curate_format format,
                                           const char* path,
                                           curate_state** out);
CURATE_API curate_status curate_state_save(const curate_state* state,
                                           const char* path);
CURATE_API void curate_state_free(curate_state* state);
/* buffer receives 16 hex digits + NUL; size must be >= 17 */
CURATE_API curate_status curate_state_fingerprint(const curate_state* state,
                                                  char* buffer, size_t size);

CURATE_API curate_status curate_diff(const curate_state* base,
                                     const curate_state* target,
                                     curate_editset** out);
CURATE_API curate_status curate_apply(const curate_state* base,
                                      const curate_editset* delta,
                                      curate_state** out);
CURATE_API curate_status curate_editset_size(const curate_editset* delta,
                                             uint64_t* out);
CURATE_API curate_status curate_editset_save(const curate_editset* delta,
                                             const char* path);
CURATE_API curate_status curate_editset_load(const char* path,
                                             curate_editset** out);
CURATE_API void curate_editset_free(curate_editset* delta);

/* distance between two states of the same format */
CURATE_API curate_status curate_distance(const curate_state* a,
                                         const curate_state* b,
                                         uint64_t* out);

/* ---- sampling and review ---- */

CURATE_API curate_status curate_srs_sample(const curate_editset* delta,
                                           uint32_t n, uint64_t seed,
                                           curate_report** out);
CURATE_API curate_status curate_stratified_sample(const curate_editset* delta,
                                                  uint32_t n, uint64_t seed,
                                                  curate_report** out);
CURATE_API curate_status curate_report_counts(const curate_report* report,
                                              uint64_t* n,
                                              uint64_t* m_observed,
                                              uint64_t* unreviewed);
CURATE_API curate_status curate_report_save(const curate_report* report,
                                            const char* path);
CURATE_API curate_status curate_report_load(const char* path,
                                            curate_report** out);
CURATE_API void curate_report_free(curate_report* report);

/* Emits the review document for a sample drawn from `delta` against
 * `base`; `source_label` names the file shown in section headers. */
CURATE_API curate_status curate_review_emit(const curate_editset* delta,
                                            const curate_report* report,
                                            const curate_state* base,
                                            const curate_state* target,
                                            const char* source_label,
                                            const char* out_path);
/* Parses a filled review document against the sample skeleton. */
CURATE_API curate_status curate_review_ingest(const char* review_path,
                                              const curate_report* skeleton,
                                              curate_report** out);

/* ---- decision rule and threshold mathematics ---- */

/* accept = 1 when at least the (noise-adjusted) threshold of sampled edits
 * is correct; the report must be fully reviewed */
CURATE_API curate_status curate_decide(const curate_report* report, int32_t n,
                                       int32_t m, double epsilon,
                                       int* accept);

CURATE_API curate_status curate_r_max(int32_t n, int32_t m, double* out);
CURATE_API curate_status curate_c_function(int32_t n, int32_t m, double* out);
CURATE_API curate_status curate_convergence_condition(double a, int32_t n,
                                                      int32_t m, int* out);
/* *out = -1 when no threshold m <= n guarantees convergence */
CURATE_API curate_status curate_min_threshold(double a, int32_t n,
                                              int32_t* out);
CURATE_API curate_status curate_noisy_adjust(int32_t n, int32_t m,
                                             double epsilon, int32_t* n_out,
                                             int32_t* m_out);
CURATE_API curate_status curate_posterior_mean_beta(int32_t n, int32_t m,
                                                    double alpha, double beta,
                                                    double epsilon,
                                                    double* out);

/* threshold table CSV (n,m_min,C,r_max,condition_bound) for given n values */
CURATE_API curate_status curate_threshold_table_csv(double a,
                                                    const int32_t* ns,
                                                    size_t count,
                                                    const char* out_path);
/* improvement-rate curve CSV over m for one n under a Beta prior;
 * conditioning: 0 = M == m, 1 = M >= m */
CURATE_API curate_status curate_rate_curve_csv(int32_t n, double alpha,
                                               double beta,
                                               double lambda_mean,
                                               int conditioning,
                                               const char* out_path);

/* ---- simulation harness ---- */

/* Runs the simulation described by a JSON config (kind: bpre|text|tests|
 * noisy) and writes trajectory + summary CSVs into out_dir. When
 * expected_kind is non-NULL the config's kind must match it. */
CURATE_API curate_status curate_simulate(const char* config_path,
                                         const char* expected_kind,
                                         const char* out_dir);

/* ---- dataset pipeline ---- */

/* Validates a dataset directory against a schema (schema_path may be NULL
 * to use dir/schema.json). Violations are reported via curate_last_error. */
CURATE_API curate_status curate_validate(const char* dir,
                                         const char* schema_path);

/* One pipeline invocation; see the CLI `release` subcommand. Returns
 * CURATE_OK on release, CURATE_REVIEW_INCOMPLETE when the review document
 * was (re)emitted and verdicts are pending, CURATE_REJECTED or
 * CURATE_VALIDATION_FAILED otherwise. */
CURATE_API curate_status curate_pipeline_run(const char* base_dir,
                                             const char* proposal_dir,
                                             const char* config_path,
                                             const char* review_path);

#ifdef __cplusplus
}
#endif

#endif /* CURATE_H */
