//! Extreme eigenvalues of SPD matrices by power and inverse iteration.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::cg::{pcg, CgOptions};
use crate::femcore::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative eigen-residual `||Av - rho v|| / rho` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: ExecMode,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-3, max_iter: 200_000, mode: ExecMode::Parallel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub cond: f64,
    pub iterations: (usize, usize),
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = Pcg64::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn normalize(mode: ExecMode, v: &mut [f64]) -> f64 {
    let s = exec::norm2(mode, v);
    v.iter_mut().for_each(|x| *x /= s);
    s
}

/// Iterates `v <- op(v)` and returns the Rayleigh quotient of `a` once the
/// eigen-residual is small.
fn iterate(
    a: &CsrMatrix,
    opts: &EigenOptions,
    what: &str,
    mut op: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(f64, usize)> {
    let n = a.n_rows;
    let mode = opts.mode;
    let mut v = start_vector(n);
    let mut av = vec![0.0; n];
    for it in 1..=opts.max_iter {
        let mut w = op(&v)?;
        if normalize(mode, &mut w) == 0.0 || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Estimation(format!("{what}: iterate collapsed")));
        }
        v = w;
        a.spmv(mode, &v, &mut av);
        let rho = exec::dot(mode, &v, &av);
        let res = exec::sum_indexed(mode, n, |i| (av[i] - rho * v[i]).powi(2)).sqrt();
        if rho > 0.0 && res <= opts.tol * rho {
            return Ok((rho, it));
        }
    }
    Err(Error::Estimation(format!("{what}: no convergence in {} iterations", opts.max_iter)))
}

pub fn lambda_max(a: &CsrMatrix, opts: &EigenOptions) -> Result<(f64, usize)> {
    let mode = opts.mode;
    iterate(a, opts, "power iteration", |v| {
        let mut w = vec![0.0; v.len()];
        a.spmv(mode, v, &mut w);
        Ok(w)
    })
}

pub fn lambda_min(a: &CsrMatrix, opts: &EigenOptions) -> Result<(f64, usize)> {
    let cg = CgOptions { tol: 1e-12, max_iter: 100 * a.n_rows.max(100), mode: opts.mode };
    iterate(a, opts, "inverse iteration", |v| {
        pcg(a, v, &cg).map(|(x, _)| x).map_err(|e| Error::Estimation(format!("inner solve failed: {e}")))
    })
}

/// Spectral condition number `lambda_max / lambda_min` of an SPD matrix.
pub fn condition_number_2norm(a: &CsrMatrix, opts: &EigenOptions) -> Result<ConditionEstimate> {
    if a.n_rows == 0 {
        return Err(Error::Estimation("empty system".into()));
    }
    let (lambda_max, i1) = lambda_max(a, opts)?;
    let (lambda_min, i2) = lambda_min(a, opts)?;
    if !(lambda_min > 0.0) {
        return Err(Error::Estimation(format!("non-positive smallest eigenvalue {lambda_min:e}")));
    }
    Ok(ConditionEstimate { lambda_max, lambda_min, cond: lambda_max / lambda_min, iterations: (i1, i2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_condition() {
        let c = condition_number_2norm(&CsrMatrix::identity(7), &EigenOptions::default()).unwrap();
        assert!((c.cond - 1.0).abs() < 1e-12);
    }
}
