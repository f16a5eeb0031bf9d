#ifndef MDI_STEERING_H
#define MDI_STEERING_H

/* Generated from the Rust sources by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible entry point.
 */
typedef enum MdiStatus {
  MDI_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  MDI_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  MDI_STATUS_UTF8 = 2,
  /**
   * JSON parsing or serialization failed.
   */
  MDI_STATUS_JSON = 3,
  /**
   * Arguments were structurally valid but semantically rejected.
   */
  MDI_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The SDP solver could not certify a solution.
   */
  MDI_STATUS_SOLVER_FAILURE = 5,
  /**
   * Unexpected internal failure (a bug; the message has details).
   */
  MDI_STATUS_INTERNAL = 6,
} MdiStatus;

/**
 * Opaque handle over a validated correlation table.
 */
typedef struct MdiCorrelations MdiCorrelations;

/**
 * Opaque handle over a validated quantum-input ensemble.
 */
typedef struct MdiInputs MdiInputs;

/**
 * Reference bounds for a Werner state, all from certified solves.
 */
typedef struct MdiWernerBounds {
  /**
   * Averaged measurement-device-independent steering measure.
   */
  double s_lb;
  /**
   * Steering robustness of the three-MUB assemblage.
   */
  double sr;
  /**
   * Entanglement robustness of the state.
   */
  double er;
  /**
   * Incompatibility robustness of the three-MUB assembly.
   */
  double ir;
} MdiWernerBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mdi_version(void);

/**
 * Description of the calling thread's most recent failure; empty string if
 * none. Valid until the next failing call on this thread.
 */
const char *mdi_last_error_message(void);

/**
 * Parses a correlation table from JSON into a new handle.
 *
 * # Safety
 * `json` must be NUL-terminated or NULL; `out` must be valid for writes.
 */
enum MdiStatus mdi_correlations_from_json(const char *json, struct MdiCorrelations **out);

/**
 * Frees a correlation handle; NULL is a no-op.
 *
 * # Safety
 * `p` must be a pointer returned by this library, freed at most once.
 */
void mdi_correlations_free(struct MdiCorrelations *p);

/**
 * Creates the six-state Pauli input ensemble.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MdiStatus mdi_inputs_pauli(struct MdiInputs **out);

/**
 * Parses a quantum-input ensemble from JSON into a new handle.
 *
 * # Safety
 * `json` must be NUL-terminated or NULL; `out` must be valid for writes.
 */
enum MdiStatus mdi_inputs_from_json(const char *json, struct MdiInputs **out);

/**
 * Frees an input-ensemble handle; NULL is a no-op.
 *
 * # Safety
 * `p` must be a pointer returned by this library, freed at most once.
 */
void mdi_inputs_free(struct MdiInputs *p);

/**
 * Certified single-outcome lower bound max{W_b − 1, 0} on the steering
 * measure, conditioning on 0-based outcome `outcome`.
 *
 * # Safety
 * `p` and `inputs` must be live handles from this library; `value` must be
 * valid for writes.
 */
enum MdiStatus mdi_measure_lb(const struct MdiCorrelations *p,
                              const struct MdiInputs *inputs,
                              uint32_t outcome,
                              double *value);

/**
 * Certified averaged estimator max{(1/4)Σ_b W_b − 1, 0} over all four
 * outcomes.
 *
 * # Safety
 * `p` and `inputs` must be live handles from this library; `value` must be
 * valid for writes.
 */
enum MdiStatus mdi_measure_avg(const struct MdiCorrelations *p,
                               const struct MdiInputs *inputs,
                               double *value);

/**
 * Computes all four reference bounds for the visibility-`v` Werner state
 * measured with the three Pauli mutually unbiased bases.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MdiStatus mdi_werner_bounds(double v, struct MdiWernerBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MDI_STEERING_H */
