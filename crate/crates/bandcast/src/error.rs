use thiserror::Error;

/// Errors surfaced by the fitting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty window: first time {q} is after last time {s}")]
    EmptyWindow { q: i64, s: i64 },

    #[error("window {q}..{s} spans more samples than supported")]
    WindowTooLarge { q: i64, s: i64 },

    #[error("signal has {got} values but the window holds {expected} samples")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite sample value at t = {t}")]
    NonFiniteValue { t: i64 },

    #[error("non-finite model coefficient at index {index}")]
    NonFiniteCoefficient { index: usize },

    #[error("coefficient vector length {0} is not odd")]
    EvenCoefficientCount(usize),

    #[error("omega must lie strictly inside (0, pi), got {0}")]
    InvalidOmega(f64),

    #[error("epsilon must be nonnegative and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("solver tolerance must be positive and finite, got {0}")]
    InvalidSolverTol(f64),

    #[error("solver iteration limit must be at least 1")]
    InvalidSolverMaxIter,

    #[error(
        "matrix is not numerically positive definite and conjugate gradient \
         stalled at relative residual {residual:.3e} after {iterations} iterations"
    )]
    NotPositiveDefinite { residual: f64, iterations: usize },

    #[error("singular system: elimination pivot vanished in column {column}")]
    SingularSystem { column: usize },

    #[error("non-consecutive sample time: expected t = {expected}, got t = {got}")]
    NonConsecutiveTime { expected: i64, got: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
