//! Solves the regularized normal equations `(R + eps*I) y = b` and provides
//! the conditioning diagnostics that a near-singular Gram spectrum calls for.
//!
//! A symmetric (Cholesky) factorization is attempted first; if it hits a
//! non-positive pivot — which happens in floating point whenever the window
//! drives eigenvalues of `R` to the roundoff floor — the solve falls back to
//! conjugate gradient started from the zero vector. That start point makes
//! the eps = 0 solution of a consistent singular system the minimum-norm
//! minimizer.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Matrix};
use crate::sinc_ops::GramMatrix;

/// How a solve was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    DirectFactorization,
    ConjugateGradient,
}

impl SolveMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SolveMethod::DirectFactorization => "direct_factorization",
            SolveMethod::ConjugateGradient => "conjugate_gradient",
        }
    }
}

/// Diagnostics attached to every solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: SolveMethod,
    /// Conjugate-gradient iterations; 0 for a direct solve.
    pub iterations: usize,
    /// Absolute residual `|| M y - b ||_2` of the returned solution.
    pub achieved_residual: f64,
    /// Power-iteration estimate of `lambda_max / lambda_min`, saturated at
    /// 1e18 (ratios beyond that are not resolvable in f64).
    pub condition_estimate: f64,
    pub lambda_max_est: f64,
    pub lambda_min_est: f64,
}

/// `R + eps*I`: the Tikhonov-shifted Gram matrix. Off-diagonal entries are
/// returned bit-for-bit unchanged.
pub fn regularize(gram: &GramMatrix, epsilon: f64) -> Matrix {
    assert!(epsilon >= 0.0, "negative regularization weight {epsilon}");
    let mut m = gram.as_matrix().clone();
    for i in 0..m.rows() {
        let v = m.get(i, i) + epsilon;
        m.set(i, i, v);
    }
    m
}

/// Solves `M y = b` for symmetric `M`.
///
/// Direct factorization when the matrix is numerically positive definite,
/// conjugate gradient (relative-residual stop `tol`, at most `max_iter`
/// iterations) otherwise. [`Error::NotPositiveDefinite`] is raised only when
/// the fallback also fails to reach `tol` — the signal that the
/// regularization weight is too small for this window.
pub fn solve_spd(
    m: &Matrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    assert!(m.is_square() && m.rows() == b.len(), "dimension mismatch");
    let (lambda_max_est, lambda_min_est) = condition_estimate(m, 80);
    let condition = condition_ratio(lambda_max_est, lambda_min_est);

    if let Some(factor) = cholesky(m) {
        let y = cholesky_solve(&factor, b);
        let achieved_residual = residual_norm(m, &y, b);
        return Ok((
            y,
            SolveReport {
                method: SolveMethod::DirectFactorization,
                iterations: 0,
                achieved_residual,
                condition_estimate: condition,
                lambda_max_est,
                lambda_min_est,
            },
        ));
    }

    let (y, iterations, rel_residual) = conjugate_gradient(m, b, tol, max_iter);
    if rel_residual <= tol {
        let achieved_residual = residual_norm(m, &y, b);
        Ok((
            y,
            SolveReport {
                method: SolveMethod::ConjugateGradient,
                iterations,
                achieved_residual,
                condition_estimate: condition,
                lambda_max_est,
                lambda_min_est,
            },
        ))
    } else {
        Err(Error::NotPositiveDefinite {
            residual: rel_residual,
            iterations,
        })
    }
}

/// Lower Cholesky factor of a symmetric matrix, or `None` at the first
/// non-positive (or non-finite) pivot.
fn cholesky(m: &Matrix) -> Option<Matrix> {
    let n = m.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m.get(j, j);
        for k in 0..j {
            diag -= l.get(j, k) * l.get(j, k);
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l.set(j, j, ljj);
        for i in j + 1..n {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, v / ljj);
        }
    }
    Some(l)
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    // Forward substitution L z = b.
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for (k, zk) in z[..i].iter().enumerate() {
            v -= l.get(i, k) * zk;
        }
        z[i] = v / l.get(i, i);
    }
    // Back substitution L^T y = z.
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = z[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            v -= l.get(k, i) * yk;
        }
        y[i] = v / l.get(i, i);
    }
    y
}

/// Conjugate gradient from the zero vector. Returns the iterate, the
/// iteration count, and the final relative residual `||r|| / ||b||`.
fn conjugate_gradient(m: &Matrix, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, usize, f64) {
    let n = b.len();
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return (vec![0.0; n], 0, 0.0);
    }
    let mut y = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rho = dot(&r, &r);
    for it in 1..=max_iter {
        let mp = m.matvec(&p);
        let denom = dot(&p, &mp);
        if denom <= 0.0 || denom.is_nan() {
            // Indefinite or exhausted search direction; stop with what we have.
            return (y, it - 1, rho.sqrt() / norm_b);
        }
        let alpha = rho / denom;
        for i in 0..n {
            y[i] += alpha * p[i];
            r[i] -= alpha * mp[i];
        }
        let rho_next = dot(&r, &r);
        if rho_next.sqrt() / norm_b <= tol {
            return (y, it, rho_next.sqrt() / norm_b);
        }
        let beta = rho_next / rho;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rho = rho_next;
    }
    (y, max_iter, rho.sqrt() / norm_b)
}

fn residual_norm(m: &Matrix, y: &[f64], b: &[f64]) -> f64 {
    let my = m.matvec(y);
    let mut acc = 0.0;
    for i in 0..b.len() {
        let d = my[i] - b[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Power-iteration estimates of the extreme eigenvalues of a symmetric
/// matrix: `lambda_max` from iterating `M`, `lambda_min` by iterating the
/// reflected matrix `sigma*I - M` (`sigma` just above the `lambda_max`
/// estimate) and reading the Rayleigh quotient of `M` at the converged
/// vector — the direct quotient avoids the cancellation floor of
/// `lambda_max - nu`. Estimates, not guarantees; the smaller value is
/// clamped at zero.
pub fn condition_estimate(m: &Matrix, iters: usize) -> (f64, f64) {
    let n = m.rows();
    if n == 0 {
        return (0.0, 0.0);
    }
    let (lambda_max, _) = power_iteration(|x, out| apply(m, x, out), n, iters, 1);
    let lambda_max = lambda_max.abs();
    let sigma = lambda_max * (1.0 + 1e-3);
    let (_, near_null) = power_iteration(
        |x, out| {
            apply(m, x, out);
            for i in 0..n {
                out[i] = sigma * x[i] - out[i];
            }
        },
        n,
        iters,
        2,
    );
    let mut mv = vec![0.0; n];
    apply(m, &near_null, &mut mv);
    let lambda_min = dot(&near_null, &mv).max(0.0);
    (lambda_max, lambda_min)
}

/// All eigenvalue estimates of a symmetric matrix by repeated power
/// iteration with deflation, sorted descending. Intended for diagnostics at
/// moderate dimension; accuracy degrades toward the small end of the
/// spectrum as deflation errors accumulate.
pub fn symmetric_eigenvalues(m: &Matrix, iters_per_eigenvalue: usize) -> Vec<f64> {
    let n = m.rows();
    let mut work = m.clone();
    let mut eigs = Vec::with_capacity(n);
    for round in 0..n {
        let (lambda, v) = power_iteration(
            |x, out| apply(&work, x, out),
            n,
            iters_per_eigenvalue,
            3 + round as u64,
        );
        eigs.push(lambda);
        for i in 0..n {
            for j in 0..n {
                let w = work.get(i, j) - lambda * v[i] * v[j];
                work.set(i, j, w);
            }
        }
    }
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eigs
}

fn apply(m: &Matrix, x: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = dot(m.row(i), x);
    }
}

/// Dominant eigenvalue (by magnitude, signed Rayleigh quotient) and a unit
/// eigenvector estimate. The start vector comes from a fixed SplitMix64
/// stream so runs are reproducible bit-for-bit.
fn power_iteration<F>(mut apply: F, n: usize, iters: usize, seed: u64) -> (f64, Vec<f64>)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut v = deterministic_unit_vector(n, seed);
    let mut w = vec![0.0; n];
    let mut rayleigh = 0.0;
    for _ in 0..iters.max(1) {
        apply(&v, &mut w);
        let next_rayleigh = dot(&v, &w);
        let norm = norm2(&w);
        if norm == 0.0 {
            // v is (numerically) in the kernel: the dominant eigenvalue of
            // the restriction reachable from v is 0.
            return (0.0, v);
        }
        for i in 0..n {
            v[i] = w[i] / norm;
        }
        if (next_rayleigh - rayleigh).abs() <= 1e-14 * next_rayleigh.abs() {
            return (next_rayleigh, v);
        }
        rayleigh = next_rayleigh;
    }
    apply(&v, &mut w);
    (dot(&v, &w), v)
}

fn deterministic_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = splitmix64(state);
            // Map to [-0.5, 0.5); never all-zero.
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = norm2(&v);
    for x in &mut v {
        *x /= norm;
    }
    v
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Eigenvalue-ratio estimate saturated at 1e18, the ceiling resolvable in
/// double precision; always finite.
pub fn condition_ratio(hi: f64, lo: f64) -> f64 {
    const SATURATION: f64 = 1e18;
    if hi <= 0.0 {
        return 1.0;
    }
    if lo <= hi / SATURATION {
        SATURATION
    } else {
        hi / lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_model::{Signal, TimeWindow};
    use crate::sinc_ops::{analyze, gram};

    #[test]
    fn regularize_identity_at_zero_and_scalar_shift() {
        let w = TimeWindow::new(-3, 3).unwrap();
        let g = gram(w, 1.0, 2);
        let same = regularize(&g, 0.0);
        assert_eq!(&same, g.as_matrix());

        let g1 = gram(
            TimeWindow::new(0, 0).unwrap(),
            std::f64::consts::PI / 2.0,
            0,
        );
        let shifted = regularize(&g1, 0.001);
        assert!((shifted.get(0, 0) - 0.251).abs() < 1e-16);
    }

    #[test]
    fn regularize_shifts_the_401_coefficient_matrix_exactly() {
        // The large experiment configuration with its working weight 0.002.
        let w = TimeWindow::new(-600, 200).unwrap();
        let g = gram(w, std::f64::consts::FRAC_PI_2, 200);
        let shifted = regularize(&g, 0.002);
        for i in 0..g.dim() {
            assert_eq!(shifted.get(i, i), g.as_matrix().get(i, i) + 0.002);
            let j = (i + 7) % g.dim();
            if i != j {
                assert_eq!(
                    shifted.get(i, j).to_bits(),
                    g.as_matrix().get(i, j).to_bits()
                );
            }
        }
    }

    #[test]
    fn regularize_touches_only_the_diagonal() {
        let w = TimeWindow::new(-9, 9).unwrap();
        let g = gram(w, 0.8, 4);
        let shifted = regularize(&g, 0.002);
        for i in 0..g.dim() {
            for j in 0..g.dim() {
                if i == j {
                    assert_eq!(shifted.get(i, j), g.as_matrix().get(i, j) + 0.002);
                } else {
                    assert_eq!(
                        shifted.get(i, j).to_bits(),
                        g.as_matrix().get(i, j).to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn scalar_solve() {
        let m = Matrix::from_rows(&[vec![0.251]]);
        let (y, report) = solve_spd(&m, &[0.502], 1e-12, 10).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15);
        assert_eq!(report.method, SolveMethod::DirectFactorization);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let m = Matrix::identity(4);
        let b = [1.0, -2.0, 0.5, 3.25];
        let (y, _) = solve_spd(&m, &b, 1e-12, 10).unwrap();
        assert_eq!(y, b.to_vec());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn solve_matches_independent_elimination_oracle() {
        // M = gram(-7..7, omega = 1, N = 3) + 1e-3 I, b from a fixed signal.
        let w = TimeWindow::new(-7, 7).unwrap();
        let g = gram(w, 1.0, 3);
        let m = regularize(&g, 1e-3);
        let values: Vec<f64> = w.iter().map(|t| (0.3 * t as f64).sin() + 0.1).collect();
        let sig = Signal::new(w, values).unwrap();
        let b = analyze(&sig, 1.0, 3);

        let (y, report) = solve_spd(&m, &b, 1e-12, 100).unwrap();

        // Plain Gaussian elimination with partial pivoting, coded inline so
        // it shares nothing with the solver under test.
        let n = b.len();
        let mut aug: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row: Vec<f64> = (0..n).map(|j| m.get(i, j)).collect();
                row.push(b[i]);
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
                .unwrap();
            aug.swap(col, piv);
            for r in col + 1..n {
                let f = aug[r][col] / aug[col][col];
                for c in col..=n {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
        let mut expect = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = aug[i][n];
            for j in i + 1..n {
                v -= aug[i][j] * expect[j];
            }
            expect[i] = v / aug[i][i];
        }

        let scale = norm2(&expect);
        for i in 0..n {
            assert!((y[i] - expect[i]).abs() <= 1e-10 * scale, "index {i}");
        }
        assert!(report.achieved_residual <= 1e-10 * norm2(&b));
    }

    #[test]
    fn condition_estimate_diagonal_and_identity() {
        let d = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 1.0]]);
        let (hi, lo) = condition_estimate(&d, 200);
        assert!((hi - 4.0).abs() < 1e-8);
        assert!((lo - 1.0).abs() < 1e-8);

        let (hi, lo) = condition_estimate(&Matrix::identity(5), 50);
        assert!((hi - 1.0).abs() < 1e-12);
        assert!((lo - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_estimate_flags_figure_one_near_singularity() {
        // Full eigendecomposition oracle for this 31x31 matrix:
        // lambda_max = 1.273238e-1, lambda_min at the roundoff floor
        // (measured -1.28e-17, zero to double precision). The Rayleigh
        // quotient estimate converges from above like exp(-2k*lambda/sigma),
        // so flushing the transition band below 1e-6 needs tens of
        // thousands of steps on a matrix this degenerate.
        let g = gram(TimeWindow::new(-25, 15).unwrap(), 0.4, 15);
        let (hi, lo) = condition_estimate(g.as_matrix(), 40_000);
        assert!((hi - 1.273238e-1).abs() < 1e-5);
        assert!(lo < 1e-6 * hi, "lo = {lo:.3e}, hi = {hi:.3e}");
    }

    #[test]
    fn cg_fallback_handles_singular_consistent_system() {
        // Rank-1 PSD matrix with b in its range: Cholesky must fail, CG must
        // recover the minimum-norm solution.
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let b = [2.0, 2.0];
        let (y, report) = solve_spd(&m, &b, 1e-12, 50).unwrap();
        assert_eq!(report.method, SolveMethod::ConjugateGradient);
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_singular_system_reports_not_positive_definite() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let b = [1.0, 1.0];
        match solve_spd(&m, &b, 1e-12, 50) {
            Err(Error::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn tikhonov_norm_monotonicity() {
        let w = TimeWindow::new(-10, 10).unwrap();
        let g = gram(w, 0.9, 4);
        let values: Vec<f64> = w.iter().map(|t| (0.7 * t as f64).cos()).collect();
        let sig = Signal::new(w, values).unwrap();
        let b = analyze(&sig, 0.9, 4);
        let mut previous = f64::INFINITY;
        for eps in [1e-6, 1e-4, 1e-2, 1.0] {
            let m = regularize(&g, eps);
            let (y, _) = solve_spd(&m, &b, 1e-12, 500).unwrap();
            let norm = norm2(&y);
            assert!(norm <= previous + 1e-10, "eps = {eps}");
            previous = norm;
        }
    }

    #[test]
    fn shifted_systems_factorize_directly_across_scales() {
        // With eps >= 1e-3 the shifted matrix is comfortably positive
        // definite for every desk-scale configuration, up to the
        // 401-coefficient experiment size; the direct route must be taken.
        let mut cases: Vec<(i64, i64, f64, usize)> =
            vec![(-600, 200, std::f64::consts::FRAC_PI_2, 200)];
        for &omega in &[0.3, 1.0, std::f64::consts::FRAC_PI_2] {
            for &n in &[4usize, 15, 60] {
                let half = 2 * n as i64;
                cases.push((-half, half, omega, n));
            }
        }
        for (q, s, omega, n) in cases {
            let w = TimeWindow::new(q, s).unwrap();
            let g = gram(w, omega, n);
            let m = regularize(&g, 1e-3);
            let values: Vec<f64> = w.iter().map(|t| (0.11 * t as f64).sin()).collect();
            let sig = Signal::new(w, values).unwrap();
            let b = analyze(&sig, omega, n);
            let (_, report) = solve_spd(&m, &b, 1e-10, 10 * (2 * n + 1)).unwrap();
            assert_eq!(
                report.method,
                SolveMethod::DirectFactorization,
                "omega={omega} N={n} window={q}..{s}"
            );
        }
    }

    #[test]
    fn eigenvalues_by_deflation_on_known_matrices() {
        let g = gram(
            TimeWindow::new(0, 0).unwrap(),
            std::f64::consts::PI / 2.0,
            0,
        );
        let eigs = symmetric_eigenvalues(g.as_matrix(), 100);
        assert_eq!(eigs.len(), 1);
        assert!((eigs[0] - 0.25).abs() < 1e-12);

        let d = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ]);
        let eigs = symmetric_eigenvalues(&d, 400);
        assert!((eigs[0] - 3.0).abs() < 1e-6);
        assert!((eigs[1] - 2.0).abs() < 1e-6);
        assert!((eigs[2] - 0.5).abs() < 1e-6);
    }
}
