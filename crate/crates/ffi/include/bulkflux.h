#ifndef BULKFLUX_H
#define BULKFLUX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call.
 */
typedef enum BfStatus {
  BF_STATUS_OK = 0,
  BF_STATUS_NULL_ARGUMENT = 1,
  BF_STATUS_INVALID_UTF8 = 2,
  BF_STATUS_CONFIG = 3,
  BF_STATUS_ABORT = 4,
  BF_STATUS_PRECONDITION = 5,
  BF_STATUS_OUT_OF_RANGE = 6,
  BF_STATUS_BUFFER_TOO_SMALL = 7,
  BF_STATUS_VERIFICATION_FAILED = 8,
  BF_STATUS_INTERNAL = 9,
} BfStatus;

/**
 * Validated scenario.
 */
typedef struct BfScenario BfScenario;

/**
 * Result of a run.
 */
typedef struct BfTrajectory BfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bf_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bf_last_error(char *buf, size_t len);

/**
 * Loads `builtin:<name>` or a JSON path, applies `n_overrides` dotted
 * `key=value` strings and validates the result.
 *
 * # Safety
 * `spec` must be a NUL-terminated string, `overrides` null or valid for
 * `n_overrides` string pointers, `out` a valid pointer.
 */
enum BfStatus bf_scenario_load(const char *spec,
                               const char *const *overrides,
                               size_t n_overrides,
                               struct BfScenario **out);

/**
 * # Safety
 * `s` must be null or a handle from [`bf_scenario_load`] not yet freed.
 */
void bf_scenario_free(struct BfScenario *s);

/**
 * # Safety
 * `s` must be a live scenario handle; `n_cells` and `n_species` valid pointers.
 */
enum BfStatus bf_scenario_shape(const struct BfScenario *s, size_t *n_cells, size_t *n_species);

/**
 * Runs the scenario to its end time.
 *
 * # Safety
 * `s` must be a live scenario handle and `out` a valid pointer.
 */
enum BfStatus bf_simulate(const struct BfScenario *s, struct BfTrajectory **out);

/**
 * # Safety
 * `t` must be null or a handle from [`bf_simulate`] not yet freed.
 */
void bf_trajectory_free(struct BfTrajectory *t);

/**
 * # Safety
 * `t` must be a live trajectory handle and `out` a valid pointer.
 */
enum BfStatus bf_trajectory_len(const struct BfTrajectory *t, size_t *out);

/**
 * Time of snapshot `k` and its values, cell-major (`n_cells * n_species`).
 *
 * # Safety
 * `t` must be a live trajectory handle, `time` a valid pointer and `values`
 * null or valid for `len` doubles.
 */
enum BfStatus bf_trajectory_snapshot(const struct BfTrajectory *t,
                                     size_t k,
                                     double *time,
                                     double *values,
                                     size_t len);

/**
 * Relative mass drift and the largest positive entropy defect of the run.
 *
 * # Safety
 * `t` must be a live trajectory handle; the outputs valid pointers.
 */
enum BfStatus bf_trajectory_diagnostics(const struct BfTrajectory *t,
                                        double *mass_drift,
                                        double *max_entropy_defect);

/**
 * Runs one verification suite by name; returns
 * [`BfStatus::VerificationFailed`] when it completes but does not pass.
 *
 * # Safety
 * `suite` must be a NUL-terminated string.
 */
enum BfStatus bf_verify(const char *suite, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BULKFLUX_H */
