//! The sinc operator kernel: basis evaluation, synthesis of a model at any
//! integer time, analysis of a windowed signal, the explicit design matrix,
//! the Gram matrix, and the model spectrum on the unit circle.
//!
//! Conventions: `sinc(x) = sin(x)/x` (unnormalized, `sinc(0) = 1`) and the
//! bandwidth factor `omega/pi` is folded into [`basis_value`], so the Gram
//! matrix carries `omega^2/pi^2`.
//!
//! All operations are pure. Gram assembly may split row blocks over threads
//! (capped by the `BANDCAST_THREADS` environment variable, `0` = auto); every
//! entry is summed over ascending time regardless, so results are
//! bit-identical for any thread count.

use std::f64::consts::PI;

use crate::linalg::Matrix;
use crate::signal_model::{BandlimitedModel, Signal, TimeWindow};

/// Unnormalized sinc, `sin(x)/x` with the removable singularity filled in.
///
/// For `|x| < 1e-6` the series `1 - x^2/6 + x^4/120` is used; its truncation
/// error there is below 1e-30, far under one ulp.
#[inline]
pub fn sinc(x: f64) -> f64 {
    debug_assert!(x.is_finite());
    if x.abs() < 1e-6 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// The coefficient multiplying `y_k` in the synthesized value at time `t`:
/// `(omega/pi) * sinc(k*pi + omega*t)`.
#[inline]
pub fn basis_value(k: i64, t: i64, omega: f64) -> f64 {
    debug_assert!(0.0 < omega && omega < PI);
    (omega / PI) * sinc(k as f64 * PI + omega * t as f64)
}

/// Evaluates the model at integer time `t`: `sum_k y_k * basis_value(k, t)`.
///
/// Defined on all of `Z`, which is what extrapolation beyond the observation
/// window rests on.
pub fn synthesize(model: &BandlimitedModel, t: i64) -> f64 {
    let n = model.half_order() as i64;
    let omega = model.omega();
    let mut acc = 0.0;
    for (i, y) in model.coefficients().iter().enumerate() {
        let k = i as i64 - n;
        acc += y * basis_value(k, t, omega);
    }
    acc
}

/// Table of raw sinc values `sinc(k*pi + omega*t)` for `k in {-N..N}` (rows)
/// and `t` over the window (columns). Shared by the Gram matrix, the design
/// matrix, and the analysis vector so the expensive evaluations happen once.
struct SincTable {
    half_order: usize,
    values: Matrix, // (2N+1) x sample_count
}

impl SincTable {
    fn build(window: TimeWindow, omega: f64, half_order: usize) -> Self {
        let n = half_order as i64;
        let cols = window.sample_count();
        let mut values = Matrix::zeros(2 * half_order + 1, cols);
        for k in -n..=n {
            let row = (k + n) as usize;
            let kpi = k as f64 * PI;
            for (j, t) in window.iter().enumerate() {
                values.set(row, j, sinc(kpi + omega * t as f64));
            }
        }
        Self { half_order, values }
    }

    fn row(&self, k_index: usize) -> &[f64] {
        self.values.row(k_index)
    }
}

/// Analysis of a windowed signal against the sinc basis:
/// `b_k = (omega/pi) * sum_{t=q}^{s} sinc(k*pi + omega*t) * x(t)`.
pub fn analyze(signal: &Signal, omega: f64, half_order: usize) -> Vec<f64> {
    debug_assert!(0.0 < omega && omega < PI);
    let table = SincTable::build(signal.window(), omega, half_order);
    let scale = omega / PI;
    (0..2 * half_order + 1)
        .map(|row| scale * crate::linalg::dot(table.row(row), signal.values()))
        .collect()
}

/// Explicit design matrix `A[t - q][k + N] = basis_value(k, t)`, the dense
/// form of the synthesis operator restricted to the window. Used by the
/// brute-force oracle and by tests of the identity `A^T A = R`.
pub fn design_matrix(window: TimeWindow, omega: f64, half_order: usize) -> Matrix {
    debug_assert!(0.0 < omega && omega < PI);
    let table = SincTable::build(window, omega, half_order);
    let scale = omega / PI;
    let n = 2 * half_order + 1;
    let m = window.sample_count();
    let mut a = Matrix::zeros(m, n);
    for col in 0..n {
        let row = table.row(col);
        for (t, &v) in row.iter().enumerate() {
            a.set(t, col, scale * v);
        }
    }
    a
}

/// Gram matrix of the windowed sinc basis.
///
/// Entries follow `R[k][m] = (omega^2/pi^2) * sum_{j=q}^{s}
/// sinc(m*pi + omega*j) * sinc(k*pi + omega*j)`; each unordered pair is
/// computed once (ascending `j`) and mirrored, so the matrix is symmetric
/// exactly and every diagonal entry is a sum of squares.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: Matrix,
    omega: f64,
    window: TimeWindow,
}

impl GramMatrix {
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn half_order(&self) -> usize {
        (self.matrix.rows() - 1) / 2
    }

    /// Dimension `2N + 1`.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Entry for signed basis indices `k, m in {-N, ..., N}`.
    pub fn entry(&self, k: i64, m: i64) -> f64 {
        let n = self.half_order() as i64;
        self.matrix.get((k + n) as usize, (m + n) as usize)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

/// Assembles the Gram matrix for a window. Cost is `O((2N+1)^2 * M)` on a
/// precomputed `(2N+1) x M` sinc table; row blocks may be distributed over
/// threads (see module docs) without affecting any bit of the result.
pub fn gram(window: TimeWindow, omega: f64, half_order: usize) -> GramMatrix {
    debug_assert!(0.0 < omega && omega < PI);
    let table = SincTable::build(window, omega, half_order);
    let scale = omega / PI;
    let scale2 = scale * scale;
    let n = 2 * half_order + 1;
    let mut matrix = Matrix::zeros(n, n);

    let threads = thread_budget().min(n);
    if threads > 1 && n >= 64 {
        let table_ref = &table;
        let rows: Vec<&mut [f64]> = matrix.rows_mut().collect();
        // Upper-triangle row k holds entries m >= k; interleave rows across
        // threads so the shrinking row lengths stay balanced.
        std::thread::scope(|scope| {
            for chunk in split_interleaved(rows, threads) {
                scope.spawn(move || {
                    for (k, row) in chunk {
                        fill_gram_row(table_ref, scale2, k, row);
                    }
                });
            }
        });
    } else {
        for (k, row) in matrix.rows_mut().enumerate() {
            fill_gram_row(&table, scale2, k, row);
        }
    }

    // Mirror the strict upper triangle onto the lower one.
    for k in 0..n {
        for m in 0..k {
            let v = matrix.get(m, k);
            matrix.set(k, m, v);
        }
    }

    GramMatrix {
        matrix,
        omega,
        window,
    }
}

fn fill_gram_row(table: &SincTable, scale2: f64, k: usize, row: &mut [f64]) {
    let n = 2 * table.half_order + 1;
    let row_k = table.row(k);
    for (m, slot) in row.iter_mut().enumerate().take(n).skip(k) {
        *slot = scale2 * crate::linalg::dot(row_k, table.row(m));
    }
}

fn split_interleaved<T>(items: Vec<T>, parts: usize) -> Vec<Vec<(usize, T)>> {
    let mut out: Vec<Vec<(usize, T)>> = (0..parts).map(|_| Vec::new()).collect();
    for (i, item) in items.into_iter().enumerate() {
        out[i % parts].push((i, item));
    }
    out
}

/// Evaluates the model's spectrum `X(e^{i w}) = sum_k y_k e^{i k w pi / omega}`
/// at `w = omega_eval`, returned as `(re, im)`. Exactly `(0, 0)` outside the
/// band `|w| <= omega`.
pub fn spectrum(model: &BandlimitedModel, omega_eval: f64) -> (f64, f64) {
    assert!(
        (-PI..=PI).contains(&omega_eval),
        "spectrum argument {omega_eval} outside [-pi, pi]"
    );
    if omega_eval.abs() > model.omega() {
        return (0.0, 0.0);
    }
    let n = model.half_order() as i64;
    let step = omega_eval * PI / model.omega();
    let mut re = 0.0;
    let mut im = 0.0;
    for (i, y) in model.coefficients().iter().enumerate() {
        let phase = (i as i64 - n) as f64 * step;
        re += y * phase.cos();
        im += y * phase.sin();
    }
    (re, im)
}

/// Worker-thread budget for internal parallelism. `BANDCAST_THREADS` caps it
/// (`0` or unset/unparsable means automatic = available cores).
pub(crate) fn thread_budget() -> usize {
    let auto = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("BANDCAST_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(0) | Err(_) => auto,
            Ok(n) => n.min(auto),
        },
        Err(_) => auto,
    }
}
