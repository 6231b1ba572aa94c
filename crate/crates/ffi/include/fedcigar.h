/* fedcigar C interface.
 * Generated by cbindgen from the fedcigar-ffi crate; do not edit by hand. */

#ifndef FEDCIGAR_H
#define FEDCIGAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of an API call. Values are stable; new ones are only appended.
typedef enum FcgStatus {
  FCG_STATUS_OK = 0,
  // A required pointer argument was null.
  FCG_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  FCG_STATUS_INVALID_UTF8 = 2,
  // An argument was out of range for the handle it addresses.
  FCG_STATUS_INVALID_ARGUMENT = 3,
  // The configuration failed to parse or validate.
  FCG_STATUS_CONFIG = 4,
  // The experiment itself failed.
  FCG_STATUS_RUN = 5,
  // The supplied buffer is too small; `written` holds the required size.
  FCG_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal invariant broke; the handle is still safe to free.
  FCG_STATUS_PANIC = 7,
} FcgStatus;

// Opaque parsed experiment configuration.
typedef struct FcgConfig FcgConfig;

// Opaque result of a finished experiment.
typedef struct FcgRun FcgRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI revision of this header and library, bumped on breaking change.
uint32_t fcg_abi_version(void);

// Message for the calling thread's most recent failure.
//
// The pointer stays valid until this thread's next call into the library;
// it is never null, and holds an empty string when nothing failed yet.
const char *fcg_last_error(void);

// Parses `key = value` configuration text into a handle.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be a valid pointer.
// On success `*out` owns the handle and must go to [`fcg_config_free`].
enum FcgStatus fcg_config_parse(const char *text, struct FcgConfig **out);

// Replaces one key in the configuration, revalidating the result.
//
// # Safety
// `cfg` must be a live handle from [`fcg_config_parse`]; `key` and `value`
// must be nul-terminated strings.
enum FcgStatus fcg_config_override(struct FcgConfig *cfg, const char *key, const char *value);

// Copies the canonical echo of the configuration (two-call protocol).
//
// # Safety
// `cfg` must be a live handle; `buf`/`cap`/`written` follow the two-call
// buffer contract described in the crate docs.
enum FcgStatus fcg_config_echo(const struct FcgConfig *cfg, char *buf, size_t cap, size_t *written);

// Releases a configuration handle. Null is ignored.
//
// # Safety
// `cfg` must be null or a handle from [`fcg_config_parse`] that has not
// been freed before.
void fcg_config_free(struct FcgConfig *cfg);

// Runs the full federated experiment described by `cfg`.
//
// Blocks until every round and the final evaluation finish; the handle it
// returns is immutable.
//
// # Safety
// `cfg` must be a live handle; `out` must be a valid pointer. On success
// `*out` owns the handle and must go to [`fcg_run_free`].
enum FcgStatus fcg_experiment_run(const struct FcgConfig *cfg, struct FcgRun **out);

// Macro-averaged AUC over clients.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_macro_auc(const struct FcgRun *run, double *out);

// Macro-averaged F1 at the contamination threshold.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_macro_f1(const struct FcgRun *run, double *out);

// Degree cap the run resolved (relevant when the config left it automatic).
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_resolved_degree_cap(const struct FcgRun *run, size_t *out);

// Seed the experiment ran under.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_seed(const struct FcgRun *run, uint64_t *out);

// Number of federated clients in the run.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_client_count(const struct FcgRun *run, size_t *out);

// Number of federation rounds the run executed.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_round_count(const struct FcgRun *run, size_t *out);

// Copies the final client-to-cluster assignment (two-call protocol,
// one entry per client).
//
// # Safety
// `run` must be a live handle; `buf` must be valid for `cap` entries when
// `cap > 0`; `written` must be a valid pointer.
enum FcgStatus fcg_run_assignment(const struct FcgRun *run,
                                  size_t *buf,
                                  size_t cap,
                                  size_t *written);

// Number of scored test graphs held by one client.
//
// # Safety
// `run` must be a live handle; `out` must be a valid pointer.
enum FcgStatus fcg_run_score_count(const struct FcgRun *run, size_t client, size_t *out);

// Copies one client's anomaly scores, in test order (two-call protocol).
//
// When `labels` is non-null it receives, per graph, 1 for anomalous ground
// truth and 0 for normal.
//
// # Safety
// `run` must be a live handle; `scores` (and `labels` when non-null) must
// be valid for `cap` entries when `cap > 0`; `written` must be a valid
// pointer.
enum FcgStatus fcg_run_scores(const struct FcgRun *run,
                              size_t client,
                              double *scores,
                              uint8_t *labels,
                              size_t cap,
                              size_t *written);

// Copies the evaluation report rendered as text (two-call protocol).
//
// # Safety
// `run` must be a live handle; `buf`/`cap`/`written` follow the two-call
// buffer contract.
enum FcgStatus fcg_run_report(const struct FcgRun *run, char *buf, size_t cap, size_t *written);

// Copies the per-round log, one JSON object per line (two-call protocol).
//
// # Safety
// `run` must be a live handle; `buf`/`cap`/`written` follow the two-call
// buffer contract.
enum FcgStatus fcg_run_round_log(const struct FcgRun *run, char *buf, size_t cap, size_t *written);

// Releases a run handle. Null is ignored.
//
// # Safety
// `run` must be null or a handle from [`fcg_experiment_run`] that has not
// been freed before.
void fcg_run_free(struct FcgRun *run);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FEDCIGAR_H */
