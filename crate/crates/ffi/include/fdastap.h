#ifndef FDASTAP_H
#define FDASTAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Array configuration used for steering and covariances.
 */
typedef enum FdaMode {
  FDA_MODE_FDA = 0,
  FDA_MODE_MIMO = 1,
  FDA_MODE_PHASED_ARRAY = 2,
} FdaMode;

/**
 * Status codes returned by every function.
 */
typedef enum FdaStatus {
  FDA_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  FDA_STATUS_NULL_POINTER = 1,
  /**
   * Invalid configuration or argument.
   */
  FDA_STATUS_INVALID = 2,
  /**
   * Output buffer length does not match.
   */
  FDA_STATUS_BUFFER_SIZE = 3,
  /**
   * Covariance factorisation failed.
   */
  FDA_STATUS_SINGULAR = 4,
  /**
   * Any other runtime failure.
   */
  FDA_STATUS_RUNTIME = 5,
  /**
   * A panic was caught at the boundary.
   */
  FDA_STATUS_PANIC = 6,
} FdaStatus;

/**
 * Opaque scenario handle.
 */
typedef struct FdaScenario FdaScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *fda_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fda_version(void);

/**
 * Creates a scenario with the default system, scene and grid.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FdaStatus fda_scenario_new(struct FdaScenario **out);

/**
 * Creates a scenario from a JSON run configuration (UTF-8, NUL-terminated).
 *
 * # Safety
 * `json` must be a valid C string and `out` valid for one handle write.
 */
enum FdaStatus fda_scenario_from_json(const char *json, struct FdaScenario **out);

/**
 * Releases a scenario. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fda_scenario_free(struct FdaScenario *s);

/**
 * Sets the number of pulses L.
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum FdaStatus fda_scenario_set_pulses(struct FdaScenario *s, size_t pulses);

/**
 * Selects the array mode.
 *
 * # Safety
 * `s` must be a live scenario handle.
 */
enum FdaStatus fda_scenario_set_mode(struct FdaScenario *s, enum FdaMode mode);

/**
 * Snapshot dimension of the configured mode.
 *
 * # Safety
 * `s` must be a live scenario handle and `out` writable.
 */
enum FdaStatus fda_snapshot_dim(const struct FdaScenario *s, size_t *out);

/**
 * Number of azimuth and Doppler cells of the evaluation grid.
 *
 * # Safety
 * `s` must be a live scenario handle and both outputs writable.
 */
enum FdaStatus fda_grid_shape(const struct FdaScenario *s, size_t *n_azimuth, size_t *n_doppler);

/**
 * MVDR adapted pattern in dB over the grid (target cell is 0 dB).
 *
 * # Safety
 * `s` must be a live handle and `out` point to `len` writable doubles.
 */
enum FdaStatus fda_adapted_pattern_db(const struct FdaScenario *s, double *out, size_t len);

/**
 * Interference spectrum `1 / (q^H R^{-1} q)` in dB over the grid.
 *
 * # Safety
 * `s` must be a live handle and `out` point to `len` writable doubles.
 */
enum FdaStatus fda_interference_spectrum_db(const struct FdaScenario *s, double *out, size_t len);

/**
 * SINR loss in dB at `azimuth_deg` for `n` Doppler values, using the
 * configured loss convention.
 *
 * # Safety
 * `dopplers` must point to `n` readable doubles and `out` to `n` writable ones.
 */
enum FdaStatus fda_sinr_loss_db(const struct FdaScenario *s,
                                double azimuth_deg,
                                const double *dopplers,
                                size_t n,
                                double *out);

/**
 * MVDR weights toward the target as interleaved (re, im) pairs; `len` must
 * be twice the snapshot dimension.
 *
 * # Safety
 * `s` must be a live handle and `out` point to `len` writable doubles.
 */
enum FdaStatus fda_mvdr_weights(const struct FdaScenario *s, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FDASTAP_H */
