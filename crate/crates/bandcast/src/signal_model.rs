//! Domain types shared by the whole pipeline: observation windows, sampled
//! signals, fit parameters, and the band-limited model a fit produces.
//!
//! Everything here is an immutable value object after construction, so the
//! types are freely shared and sent between threads.

use crate::error::{Error, Result};

/// Inclusive set of integer observation times `{q, q+1, ..., s}`.
///
/// Only finite windows are representable; a reversed pair is rejected at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    q: i64,
    s: i64,
}

impl TimeWindow {
    /// Largest representable sample count; keeps all index arithmetic safely
    /// inside i64/usize.
    pub const MAX_SAMPLES: u64 = 1 << 32;

    /// Builds the window `{q, ..., s}`. Fails with [`Error::EmptyWindow`]
    /// when `q > s` and with [`Error::WindowTooLarge`] beyond
    /// [`Self::MAX_SAMPLES`].
    pub fn new(q: i64, s: i64) -> Result<Self> {
        if q > s {
            return Err(Error::EmptyWindow { q, s });
        }
        if (s as i128 - q as i128 + 1) > Self::MAX_SAMPLES as i128 {
            return Err(Error::WindowTooLarge { q, s });
        }
        Ok(Self { q, s })
    }

    /// First observed time `q`.
    pub fn first(&self) -> i64 {
        self.q
    }

    /// Last observed time `s`.
    pub fn last(&self) -> i64 {
        self.s
    }

    /// Number of samples `s - q + 1` (always at least 1).
    pub fn sample_count(&self) -> usize {
        (self.s - self.q + 1) as usize
    }

    /// Iterates the observation times in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.q..=self.s
    }

    pub fn contains(&self, t: i64) -> bool {
        self.q <= t && t <= self.s
    }
}

/// `true` iff the window length satisfies `s - q >= 2N + 1`, the regime in
/// which the optimal band-limited approximant (and hence its extrapolation)
/// is unique. Below that bound the minimizers form a linear manifold and a
/// fit returns one representative.
///
/// The condition is on the index difference `s - q`, not the sample count.
#[allow(clippy::int_plus_one)] // keep the bound in its stated `>= 2N + 1` form
pub fn is_unique_regime(window: TimeWindow, half_order: usize) -> bool {
    window.s - window.q >= 2 * half_order as i64 + 1
}

/// Real sample values attached to a [`TimeWindow`], `values[i] = x(q + i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    window: TimeWindow,
    values: Vec<f64>,
}

impl Signal {
    /// Validates that `values` covers the window exactly and contains no
    /// NaN or infinity.
    pub fn new(window: TimeWindow, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.sample_count() {
            return Err(Error::LengthMismatch {
                expected: window.sample_count(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    t: window.q + i as i64,
                });
            }
        }
        Ok(Self { window, values })
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample at absolute time `t`, or `None` outside the window.
    pub fn value_at(&self, t: i64) -> Option<f64> {
        if self.window.contains(t) {
            Some(self.values[(t - self.window.q) as usize])
        } else {
            None
        }
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Parameters of a fit: bandwidth, series half-order, Tikhonov weight, and
/// the iterative-solver knobs used when direct factorization fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    omega: f64,
    half_order: usize,
    epsilon: f64,
    solver_tol: f64,
    solver_max_iter: usize,
}

impl FitConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-3;
    pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

    /// Builds a config with default regularization `epsilon = 1e-3`,
    /// solver tolerance `1e-10`, and iteration limit `10 * (2N + 1)`.
    ///
    /// `omega` must lie strictly inside `(0, pi)`; `omega = pi` reduces the
    /// problem to a trivial relabeling and is excluded.
    pub fn new(omega: f64, half_order: usize) -> Result<Self> {
        if !(omega.is_finite() && 0.0 < omega && omega < std::f64::consts::PI) {
            return Err(Error::InvalidOmega(omega));
        }
        Ok(Self {
            omega,
            half_order,
            epsilon: Self::DEFAULT_EPSILON,
            solver_tol: Self::DEFAULT_SOLVER_TOL,
            solver_max_iter: 10 * (2 * half_order + 1),
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_solver_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidSolverTol(tol));
        }
        self.solver_tol = tol;
        Ok(self)
    }

    pub fn with_solver_max_iter(mut self, max_iter: usize) -> Result<Self> {
        if max_iter == 0 {
            return Err(Error::InvalidSolverMaxIter);
        }
        self.solver_max_iter = max_iter;
        Ok(self)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn half_order(&self) -> usize {
        self.half_order
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn solver_tol(&self) -> f64 {
        self.solver_tol
    }

    pub fn solver_max_iter(&self) -> usize {
        self.solver_max_iter
    }

    /// Number of series coefficients, `2N + 1`.
    pub fn coefficient_count(&self) -> usize {
        2 * self.half_order + 1
    }
}

/// A band-limited model: coefficients `y_k` for `k in {-N, ..., N}` (stored
/// at position `k + N`) together with the bandwidth `omega`. Defines a value
/// at every integer time, which is what makes extrapolation beyond the
/// fitted window possible.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedModel {
    omega: f64,
    coefficients: Vec<f64>,
}

impl BandlimitedModel {
    pub fn new(omega: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(omega.is_finite() && 0.0 < omega && omega < std::f64::consts::PI) {
            return Err(Error::InvalidOmega(omega));
        }
        if coefficients.len().is_multiple_of(2) {
            return Err(Error::EvenCoefficientCount(coefficients.len()));
        }
        for (i, c) in coefficients.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoefficient { index: i });
            }
        }
        Ok(Self {
            omega,
            coefficients,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn half_order(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficient `y_k` for signed index `k in {-N, ..., N}`.
    pub fn coefficient(&self, k: i64) -> f64 {
        let n = self.half_order() as i64;
        assert!(
            -n <= k && k <= n,
            "coefficient index {k} out of [-{n}, {n}]"
        );
        self.coefficients[(k + n) as usize]
    }

    pub fn norm_l2(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}
