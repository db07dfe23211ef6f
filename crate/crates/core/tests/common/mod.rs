//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use roughfem::femcore::CsrMatrix;

/// Adaptive Simpson quadrature with Richardson correction. The first levels
/// are always refined so periodic integrands cannot fool the error test.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || (depth < 42 && delta.abs() <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Adaptive Simpson over `[a, b]` split at the given interior points.
pub fn integrate_split(f: &dyn Fn(f64) -> f64, points: &[f64], tol: f64) -> f64 {
    let per = tol / points.len().max(2) as f64;
    points.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], per)).sum()
}

pub fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    DMatrix::from_fn(a.n_rows, a.n_cols, |i, j| d[i][j])
}

/// Dense LU solve.
pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
    dense(a).lu().solve(&DVector::from_column_slice(b)).expect("nonsingular").iter().copied().collect()
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn dense_extreme_eigenvalues(a: &CsrMatrix) -> (f64, f64) {
    let ev = dense(a).symmetric_eigen().eigenvalues;
    (ev.min(), ev.max())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
