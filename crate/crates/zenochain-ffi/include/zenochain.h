/* C interface to the zenochain monitored-spin-chain simulator. */

#ifndef ZENOCHAIN_H
#define ZENOCHAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum ZcStatus {
  /**
   * Success.
   */
  ZcStatus_Ok = 0,
  /**
   * Invalid configuration or input (bad parameter, unknown name, …).
   */
  ZcStatus_Config = 1,
  /**
   * Numerical failure during integration or analysis.
   */
  ZcStatus_Numerical = 2,
  /**
   * A required pointer argument was null.
   */
  ZcStatus_NullPointer = 3,
  /**
   * A string argument was not valid UTF-8.
   */
  ZcStatus_InvalidString = 4,
  /**
   * Internal panic; state is unspecified but the process may continue.
   */
  ZcStatus_Panic = 5,
} ZcStatus;

/**
 * Opaque model-parameter handle (chain length, Γ, λ, η, dt).
 */
typedef struct ZcParams ZcParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread (empty string when no error occurred).
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *zc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *zc_version(void);

/**
 * Create a parameter set for `sites` spins with field-noise strength
 * `gamma`, measurement strength `lambda`, and detector efficiency `eta`.
 * The integrator step defaults to min(0.05, 0.05/Γ, 0.05/λ).
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum ZcStatus zc_params_new(uint32_t sites,
                            double gamma,
                            double lambda,
                            double eta,
                            struct ZcParams **out);

/**
 * Override the integrator step.
 *
 * # Safety
 * `params` must be a live handle from [`zc_params_new`].
 */
enum ZcStatus zc_params_set_dt(struct ZcParams *params, double dt);

/**
 * Release a parameter handle.  Null is ignored.
 *
 * # Safety
 * `params` must be null or a live handle from [`zc_params_new`], and must
 * not be used afterwards.
 */
void zc_params_free(struct ZcParams *params);

/**
 * Trajectory-ensemble steady-state average of one observable under the
 * diffusive unraveling, starting from the Néel state.  Burn-in, averaging
 * window, sampling interval, and trajectory count follow the arguments;
 * `out_mean`/`out_stderr` receive the ensemble statistics.
 *
 * # Safety
 * `params` must be a live handle; `observable` must be a NUL-terminated
 * string; `out_mean` and `out_stderr` must be writable.
 */
enum ZcStatus zc_steady_state_average(const struct ZcParams *params,
                                      const char *observable,
                                      uint64_t n_traj,
                                      double t_burn,
                                      double t_window,
                                      double sample_interval,
                                      uint64_t master_seed,
                                      double *out_mean,
                                      double *out_stderr);

/**
 * Evaluate an observable on a caller-supplied density matrix for `sites`
 * spins.  `rho` holds 2^sites × 2^sites complex entries as interleaved
 * doubles in row-major order (length 2·4^sites).
 *
 * # Safety
 * `rho` must point to `2 * 4^sites` readable doubles; `out` must be
 * writable; `observable` must be a NUL-terminated string.
 */
enum ZcStatus zc_observable_from_density(uint32_t sites,
                                         const double *rho,
                                         const char *observable,
                                         double *out);

/**
 * Run the built-in verification oracles.  Writes the number of failed and
 * total checks; returns `Numerical` when any check fails.
 *
 * # Safety
 * `out_failed` and `out_total` must be writable or null (null skips the
 * write).
 */
enum ZcStatus zc_verify(uint32_t *out_failed, uint32_t *out_total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZENOCHAIN_H */
