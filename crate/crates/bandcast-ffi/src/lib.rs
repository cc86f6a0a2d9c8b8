//! C ABI over the bandcast library: opaque handles, status codes, and
//! caller-allocated output buffers. The matching header is generated into
//! `include/bandcast.h` by the build script.
//!
//! Conventions:
//! - Every fallible call returns a [`BandcastStatus`]; `Ok` is 0.
//! - Objects come back through out-pointers as opaque handles and must be
//!   released with the matching `*_free` function exactly once.
//! - Buffer-filling calls take the buffer length and fail with
//!   `BufferTooSmall` instead of writing past the end.
//! - Panics never unwind across the boundary; they surface as
//!   `InternalPanic`.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use bandcast::{
    fit, fit_highband, forecast, Error, FilterMode, FilterState, FitConfig, FitResult, Signal,
    SolveMethod, TimeWindow,
};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandcastStatus {
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// A numeric argument was out of range (omega, epsilon, window, ...).
    InvalidArgument = 2,
    /// A sample or coefficient was NaN or infinite.
    NonFiniteValue = 3,
    /// The regularized system could not be solved; epsilon is too small for
    /// this window.
    SolverFailure = 4,
    /// Sample pushed out of order into a filter.
    NonConsecutiveTime = 5,
    /// An output buffer was shorter than required.
    BufferTooSmall = 6,
    /// An internal invariant failed; the library panicked.
    InternalPanic = 7,
}

fn status_of(error: &Error) -> BandcastStatus {
    match error {
        Error::NonFiniteValue { .. } | Error::NonFiniteCoefficient { .. } => {
            BandcastStatus::NonFiniteValue
        }
        Error::NotPositiveDefinite { .. } | Error::SingularSystem { .. } => {
            BandcastStatus::SolverFailure
        }
        Error::NonConsecutiveTime { .. } => BandcastStatus::NonConsecutiveTime,
        _ => BandcastStatus::InvalidArgument,
    }
}

/// Static description of a status code; never null, never freed.
#[no_mangle]
pub extern "C" fn bandcast_status_name(status: BandcastStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        BandcastStatus::Ok => b"ok\0",
        BandcastStatus::NullPointer => b"null pointer\0",
        BandcastStatus::InvalidArgument => b"invalid argument\0",
        BandcastStatus::NonFiniteValue => b"non-finite value\0",
        BandcastStatus::SolverFailure => b"solver failure\0",
        BandcastStatus::NonConsecutiveTime => b"non-consecutive time\0",
        BandcastStatus::BufferTooSmall => b"buffer too small\0",
        BandcastStatus::InternalPanic => b"internal panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Opaque fitted-model handle.
pub struct BandcastFit {
    result: FitResult,
}

/// Opaque streaming-filter handle.
pub struct BandcastFilter {
    state: FilterState,
    horizon: usize,
}

/// Per-push filter emission. `forecasts` are returned through a separate
/// caller-allocated buffer.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BandcastFilterOutput {
    pub t_now: i64,
    pub smoothed_now: f64,
    pub residual_l2: f64,
    pub unique_regime: bool,
}

fn guard(body: impl FnOnce() -> BandcastStatus) -> BandcastStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => BandcastStatus::InternalPanic,
    }
}

fn build_config(omega: f64, half_order: usize, epsilon: f64) -> Result<FitConfig, BandcastStatus> {
    FitConfig::new(omega, half_order)
        .and_then(|c| c.with_epsilon(epsilon))
        .map_err(|e| status_of(&e))
}

unsafe fn signal_from_raw(
    first_t: i64,
    values: *const f64,
    len: usize,
) -> Result<Signal, BandcastStatus> {
    if values.is_null() {
        return Err(BandcastStatus::NullPointer);
    }
    if len == 0 {
        return Err(BandcastStatus::InvalidArgument);
    }
    let slice = std::slice::from_raw_parts(values, len);
    let window = TimeWindow::new(first_t, first_t + len as i64 - 1).map_err(|e| status_of(&e))?;
    Signal::new(window, slice.to_vec()).map_err(|e| status_of(&e))
}

#[allow(clippy::too_many_arguments)]
unsafe fn run_fit(
    first_t: i64,
    values: *const f64,
    len: usize,
    omega: f64,
    half_order: usize,
    epsilon: f64,
    highband: bool,
    out_fit: *mut *mut BandcastFit,
) -> BandcastStatus {
    if out_fit.is_null() {
        return BandcastStatus::NullPointer;
    }
    let signal = match signal_from_raw(first_t, values, len) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let config = match build_config(omega, half_order, epsilon) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let fitted = if highband {
        fit_highband(&signal, &config)
    } else {
        fit(&signal, &config)
    };
    match fitted {
        Ok(result) => {
            *out_fit = Box::into_raw(Box::new(BandcastFit { result }));
            BandcastStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Fits the band-limited model to `len` consecutive samples starting at time
/// `first_t` and returns an owned handle through `out_fit`.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out_fit` must be a valid
/// pointer to receive the handle. The handle must be released with
/// [`bandcast_fit_free`].
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit(
    first_t: i64,
    values: *const f64,
    len: usize,
    omega: f64,
    half_order: usize,
    epsilon: f64,
    out_fit: *mut *mut BandcastFit,
) -> BandcastStatus {
    guard(|| {
        run_fit(
            first_t, values, len, omega, half_order, epsilon, false, out_fit,
        )
    })
}

/// High-frequency-band variant of [`bandcast_fit`]: approximates by
/// processes supported on `[-pi, -pi+omega] U [pi-omega, pi]`.
///
/// # Safety
/// As for [`bandcast_fit`].
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_highband(
    first_t: i64,
    values: *const f64,
    len: usize,
    omega: f64,
    half_order: usize,
    epsilon: f64,
    out_fit: *mut *mut BandcastFit,
) -> BandcastStatus {
    guard(|| {
        run_fit(
            first_t, values, len, omega, half_order, epsilon, true, out_fit,
        )
    })
}

/// Releases a fit handle. Null is tolerated; double-free is not.
///
/// # Safety
/// `fit` must have come from a `bandcast_fit*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_free(fit: *mut BandcastFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of model coefficients (2N + 1); 0 when `fit` is null.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_coefficient_count(fit: *const BandcastFit) -> usize {
    fit.as_ref()
        .map_or(0, |f| f.result.model().coefficients().len())
}

/// Number of fitted samples (the window length); 0 when `fit` is null.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_sample_count(fit: *const BandcastFit) -> usize {
    fit.as_ref().map_or(0, |f| f.result.fitted_values().len())
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, dst_len: usize) -> BandcastStatus {
    if dst.is_null() {
        return BandcastStatus::NullPointer;
    }
    if dst_len < src.len() {
        return BandcastStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    BandcastStatus::Ok
}

/// Copies the model coefficients `y_{-N}, ..., y_{N}` into `out`.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold at least `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_copy_coefficients(
    fit: *const BandcastFit,
    out: *mut f64,
    out_len: usize,
) -> BandcastStatus {
    guard(|| match fit.as_ref() {
        None => BandcastStatus::NullPointer,
        Some(f) => copy_out(f.result.model().coefficients(), out, out_len),
    })
}

/// Copies the on-window reconstruction `x_hat(q), ..., x_hat(s)` into `out`.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold at least `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_copy_fitted(
    fit: *const BandcastFit,
    out: *mut f64,
    out_len: usize,
) -> BandcastStatus {
    guard(|| match fit.as_ref() {
        None => BandcastStatus::NullPointer,
        Some(f) => copy_out(f.result.fitted_values(), out, out_len),
    })
}

/// Model value at an arbitrary integer time (NaN when `fit` is null).
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_value_at(fit: *const BandcastFit, t: i64) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.result.value_at(t))
}

/// Writes the `horizon` forecast values `x_hat(s+1), ..., x_hat(s+horizon)`.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold at least `horizon` doubles.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_forecast(
    fit: *const BandcastFit,
    out: *mut f64,
    horizon: usize,
) -> BandcastStatus {
    guard(|| match fit.as_ref() {
        None => BandcastStatus::NullPointer,
        Some(f) => {
            if horizon == 0 {
                return BandcastStatus::InvalidArgument;
            }
            let values = forecast(&f.result, horizon);
            copy_out(&values, out, horizon)
        }
    })
}

/// Root of the summed squared on-window error (NaN when `fit` is null).
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_residual_l2(fit: *const BandcastFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.result.residual_l2())
}

/// Residual of the normal-equation solve (NaN when `fit` is null).
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_normal_residual(fit: *const BandcastFit) -> f64 {
    fit.as_ref()
        .map_or(f64::NAN, |f| f.result.normal_residual())
}

/// Whether the window length guarantees a unique approximant.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_unique_regime(fit: *const BandcastFit) -> bool {
    fit.as_ref().is_some_and(|f| f.result.unique_regime())
}

/// 1 when the solve used the conjugate-gradient fallback, 0 for a direct
/// factorization, -1 when `fit` is null.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_used_iterative_solver(fit: *const BandcastFit) -> i32 {
    fit.as_ref()
        .map_or(-1, |f| match f.result.solver_info().method {
            SolveMethod::DirectFactorization => 0,
            SolveMethod::ConjugateGradient => 1,
        })
}

/// Saturated estimate of the condition number of the solved system (NaN when
/// `fit` is null).
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_fit_condition_estimate(fit: *const BandcastFit) -> f64 {
    fit.as_ref()
        .map_or(f64::NAN, |f| f.result.solver_info().condition_estimate)
}

/// Creates an expanding-window causal filter.
///
/// # Safety
/// `out_filter` must be a valid pointer to receive the handle; release with
/// [`bandcast_filter_free`].
#[no_mangle]
pub unsafe extern "C" fn bandcast_filter_new_expanding(
    omega: f64,
    half_order: usize,
    epsilon: f64,
    horizon: usize,
    out_filter: *mut *mut BandcastFilter,
) -> BandcastStatus {
    guard(|| filter_new(omega, half_order, epsilon, horizon, None, out_filter))
}

/// Creates a sliding-window causal filter keeping the latest `width` samples.
///
/// # Safety
/// As for [`bandcast_filter_new_expanding`].
#[no_mangle]
pub unsafe extern "C" fn bandcast_filter_new_sliding(
    omega: f64,
    half_order: usize,
    epsilon: f64,
    horizon: usize,
    width: usize,
    out_filter: *mut *mut BandcastFilter,
) -> BandcastStatus {
    guard(|| filter_new(omega, half_order, epsilon, horizon, Some(width), out_filter))
}

unsafe fn filter_new(
    omega: f64,
    half_order: usize,
    epsilon: f64,
    horizon: usize,
    width: Option<usize>,
    out_filter: *mut *mut BandcastFilter,
) -> BandcastStatus {
    if out_filter.is_null() {
        return BandcastStatus::NullPointer;
    }
    if horizon == 0 || width == Some(0) {
        return BandcastStatus::InvalidArgument;
    }
    let config = match build_config(omega, half_order, epsilon) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let mode = match width {
        None => FilterMode::Expanding,
        Some(width) => FilterMode::Sliding { width },
    };
    let state = FilterState::new(mode, config, horizon);
    *out_filter = Box::into_raw(Box::new(BandcastFilter { state, horizon }));
    BandcastStatus::Ok
}

/// Releases a filter handle. Null is tolerated; double-free is not.
///
/// # Safety
/// `filter` must have come from a `bandcast_filter_new_*` call and not be
/// freed twice.
#[no_mangle]
pub unsafe extern "C" fn bandcast_filter_free(filter: *mut BandcastFilter) {
    if !filter.is_null() {
        drop(Box::from_raw(filter));
    }
}

/// Pushes the sample at time `t` (must be one past the previous sample),
/// refits, and fills `out` plus the `forecasts` buffer (which must hold the
/// filter's horizon).
///
/// # Safety
/// `filter` must be a live handle; `out` must be a valid pointer;
/// `forecasts` must hold at least `forecasts_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bandcast_filter_push(
    filter: *mut BandcastFilter,
    t: i64,
    value: f64,
    out: *mut BandcastFilterOutput,
    forecasts: *mut f64,
    forecasts_len: usize,
) -> BandcastStatus {
    guard(|| {
        let Some(handle) = filter.as_mut() else {
            return BandcastStatus::NullPointer;
        };
        if out.is_null() {
            return BandcastStatus::NullPointer;
        }
        if forecasts.is_null() {
            return BandcastStatus::NullPointer;
        }
        if forecasts_len < handle.horizon {
            return BandcastStatus::BufferTooSmall;
        }
        match handle.state.push(t, value) {
            Ok(emitted) => {
                *out = BandcastFilterOutput {
                    t_now: emitted.t_now,
                    smoothed_now: emitted.smoothed_now,
                    residual_l2: emitted.residual_l2,
                    unique_regime: emitted.unique_regime,
                };
                copy_out(&emitted.forecasts, forecasts, forecasts_len)
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of samples currently buffered; 0 when `filter` is null.
///
/// # Safety
/// `filter` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bandcast_filter_buffered(filter: *const BandcastFilter) -> usize {
    filter.as_ref().map_or(0, |f| f.state.buffered())
}
