//! Mean-square optimal band-limited approximation and forecasting of
//! integer-time signals.
//!
//! Given samples `x(q), ..., x(s)` and a bandwidth `omega` in `(0, pi)`, the
//! library finds the process with spectrum supported on `[-omega, omega]`
//! (parameterized by `2N + 1` sinc-series coefficients) that minimizes the
//! squared error against the window, optionally with a Tikhonov-shifted
//! normal-equation solve to tame the near-singular Gram spectra these bases
//! produce. The fitted process is defined at every integer time, so its
//! values beyond the window serve as a forecast, and re-fitting per arriving
//! sample yields a causal (not time-invariant) filter.
//!
//! ```
//! use bandcast::{fit, forecast, FitConfig, Signal, TimeWindow};
//!
//! let window = TimeWindow::new(-25, 15)?;
//! let values: Vec<f64> = window.iter().map(|t| (0.3 * t as f64).sin()).collect();
//! let signal = Signal::new(window, values)?;
//! let config = FitConfig::new(0.4, 15)?; // omega, N; epsilon defaults to 1e-3
//!
//! let result = fit(&signal, &config)?;
//! let ahead = forecast(&result, 10);
//! assert_eq!(ahead.len(), 10);
//! assert!(result.unique_regime());
//! # Ok::<(), bandcast::Error>(())
//! ```

pub mod approximator;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod signal_model;
pub mod sinc_ops;
pub mod solver;
pub mod streaming_filter;

pub use approximator::{
    brute_force_fit, fit, fit_highband, forecast, objective, objective_regularized, Band, FitResult,
};
pub use error::{Error, Result};
pub use signal_model::{is_unique_regime, BandlimitedModel, FitConfig, Signal, TimeWindow};
pub use sinc_ops::{
    analyze, basis_value, design_matrix, gram, sinc, spectrum, synthesize, GramMatrix,
};
pub use solver::{
    condition_estimate, condition_ratio, regularize, solve_spd, symmetric_eigenvalues, SolveMethod,
    SolveReport,
};
pub use streaming_filter::{run_offline, FilterMode, FilterOutput, FilterState};
