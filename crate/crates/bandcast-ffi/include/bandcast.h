/* C interface to the bandcast band-limited approximation library. */

#ifndef BANDCAST_H
#define BANDCAST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum BandcastStatus {
  BandcastStatus_Ok = 0,
  /**
   * A pointer argument was null.
   */
  BandcastStatus_NullPointer = 1,
  /**
   * A numeric argument was out of range (omega, epsilon, window, ...).
   */
  BandcastStatus_InvalidArgument = 2,
  /**
   * A sample or coefficient was NaN or infinite.
   */
  BandcastStatus_NonFiniteValue = 3,
  /**
   * The regularized system could not be solved; epsilon is too small for
   * this window.
   */
  BandcastStatus_SolverFailure = 4,
  /**
   * Sample pushed out of order into a filter.
   */
  BandcastStatus_NonConsecutiveTime = 5,
  /**
   * An output buffer was shorter than required.
   */
  BandcastStatus_BufferTooSmall = 6,
  /**
   * An internal invariant failed; the library panicked.
   */
  BandcastStatus_InternalPanic = 7,
} BandcastStatus;

/**
 * Opaque streaming-filter handle.
 */
typedef struct BandcastFilter BandcastFilter;

/**
 * Opaque fitted-model handle.
 */
typedef struct BandcastFit BandcastFit;

/**
 * Per-push filter emission. `forecasts` are returned through a separate
 * caller-allocated buffer.
 */
typedef struct BandcastFilterOutput {
  int64_t t_now;
  double smoothed_now;
  double residual_l2;
  bool unique_regime;
} BandcastFilterOutput;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code; never null, never freed.
 */
const char *bandcast_status_name(enum BandcastStatus status);

/**
 * Fits the band-limited model to `len` consecutive samples starting at time
 * `first_t` and returns an owned handle through `out_fit`.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out_fit` must be a valid
 * pointer to receive the handle. The handle must be released with
 * [`bandcast_fit_free`].
 */
enum BandcastStatus bandcast_fit(int64_t first_t,
                                 const double *values,
                                 size_t len,
                                 double omega,
                                 size_t half_order,
                                 double epsilon,
                                 struct BandcastFit **out_fit);

/**
 * High-frequency-band variant of [`bandcast_fit`]: approximates by
 * processes supported on `[-pi, -pi+omega] U [pi-omega, pi]`.
 *
 * # Safety
 * As for [`bandcast_fit`].
 */
enum BandcastStatus bandcast_fit_highband(int64_t first_t,
                                          const double *values,
                                          size_t len,
                                          double omega,
                                          size_t half_order,
                                          double epsilon,
                                          struct BandcastFit **out_fit);

/**
 * Releases a fit handle. Null is tolerated; double-free is not.
 *
 * # Safety
 * `fit` must have come from a `bandcast_fit*` call and not be freed twice.
 */
void bandcast_fit_free(struct BandcastFit *fit);

/**
 * Number of model coefficients (2N + 1); 0 when `fit` is null.
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
size_t bandcast_fit_coefficient_count(const struct BandcastFit *fit);

/**
 * Number of fitted samples (the window length); 0 when `fit` is null.
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
size_t bandcast_fit_sample_count(const struct BandcastFit *fit);

/**
 * Copies the model coefficients `y_{-N}, ..., y_{N}` into `out`.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold at least `out_len` doubles.
 */
enum BandcastStatus bandcast_fit_copy_coefficients(const struct BandcastFit *fit,
                                                   double *out,
                                                   size_t out_len);

/**
 * Copies the on-window reconstruction `x_hat(q), ..., x_hat(s)` into `out`.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold at least `out_len` doubles.
 */
enum BandcastStatus bandcast_fit_copy_fitted(const struct BandcastFit *fit,
                                             double *out,
                                             size_t out_len);

/**
 * Model value at an arbitrary integer time (NaN when `fit` is null).
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
double bandcast_fit_value_at(const struct BandcastFit *fit, int64_t t);

/**
 * Writes the `horizon` forecast values `x_hat(s+1), ..., x_hat(s+horizon)`.
 *
 * # Safety
 * `fit` must be a live handle; `out` must hold at least `horizon` doubles.
 */
enum BandcastStatus bandcast_fit_forecast(const struct BandcastFit *fit,
                                          double *out,
                                          size_t horizon);

/**
 * Root of the summed squared on-window error (NaN when `fit` is null).
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
double bandcast_fit_residual_l2(const struct BandcastFit *fit);

/**
 * Residual of the normal-equation solve (NaN when `fit` is null).
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
double bandcast_fit_normal_residual(const struct BandcastFit *fit);

/**
 * Whether the window length guarantees a unique approximant.
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
bool bandcast_fit_unique_regime(const struct BandcastFit *fit);

/**
 * 1 when the solve used the conjugate-gradient fallback, 0 for a direct
 * factorization, -1 when `fit` is null.
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
int32_t bandcast_fit_used_iterative_solver(const struct BandcastFit *fit);

/**
 * Saturated estimate of the condition number of the solved system (NaN when
 * `fit` is null).
 *
 * # Safety
 * `fit` must be a live handle or null.
 */
double bandcast_fit_condition_estimate(const struct BandcastFit *fit);

/**
 * Creates an expanding-window causal filter.
 *
 * # Safety
 * `out_filter` must be a valid pointer to receive the handle; release with
 * [`bandcast_filter_free`].
 */
enum BandcastStatus bandcast_filter_new_expanding(double omega,
                                                  size_t half_order,
                                                  double epsilon,
                                                  size_t horizon,
                                                  struct BandcastFilter **out_filter);

/**
 * Creates a sliding-window causal filter keeping the latest `width` samples.
 *
 * # Safety
 * As for [`bandcast_filter_new_expanding`].
 */
enum BandcastStatus bandcast_filter_new_sliding(double omega,
                                                size_t half_order,
                                                double epsilon,
                                                size_t horizon,
                                                size_t width,
                                                struct BandcastFilter **out_filter);

/**
 * Releases a filter handle. Null is tolerated; double-free is not.
 *
 * # Safety
 * `filter` must have come from a `bandcast_filter_new_*` call and not be
 * freed twice.
 */
void bandcast_filter_free(struct BandcastFilter *filter);

/**
 * Pushes the sample at time `t` (must be one past the previous sample),
 * refits, and fills `out` plus the `forecasts` buffer (which must hold the
 * filter's horizon).
 *
 * # Safety
 * `filter` must be a live handle; `out` must be a valid pointer;
 * `forecasts` must hold at least `forecasts_len` doubles.
 */
enum BandcastStatus bandcast_filter_push(struct BandcastFilter *filter,
                                         int64_t t,
                                         double value,
                                         struct BandcastFilterOutput *out,
                                         double *forecasts,
                                         size_t forecasts_len);

/**
 * Number of samples currently buffered; 0 when `filter` is null.
 *
 * # Safety
 * `filter` must be a live handle or null.
 */
size_t bandcast_filter_buffered(const struct BandcastFilter *filter);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BANDCAST_H */
