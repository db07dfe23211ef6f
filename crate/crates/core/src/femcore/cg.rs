use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::sparse::CsrMatrix;
use crate::femcore::system::ConstrainedSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target relative residual `||b - Ax|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: ExecMode,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: 200_000, mode: ExecMode::Parallel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// Convergence is confirmed on an accurately computed true residual; if the
/// recursively updated residual has drifted, the iteration restarts from
/// the current iterate with the true residual.
pub fn pcg(a: &CsrMatrix, b: &[f64], opts: &CgOptions) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n_rows;
    let mode = opts.mode;
    let mut x = vec![0.0; n];
    let bnorm = exec::norm2(mode, b);
    if n == 0 || bnorm == 0.0 {
        return Ok((x, CgStats::default()));
    }
    let inv_diag: Vec<f64> = a.diagonal().into_iter().map(|d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let target = opts.tol * bnorm;
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    let mut rnorm = bnorm;
    let mut it = 0;
    while it < opts.max_iter {
        // (re)start from the current residual
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        p.copy_from_slice(&z);
        let mut rz = exec::dot(mode, &r, &z);
        let mut converged = false;
        while it < opts.max_iter {
            it += 1;
            a.spmv(mode, &p, &mut ap);
            let pap = exec::dot(mode, &p, &ap);
            if !(pap > 0.0) {
                return Err(Error::Convergence { iterations: it, residual: rnorm / bnorm });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            rnorm = exec::norm2(mode, &r);
            if it % 500 == 0 {
                log::trace!("cg: iteration {it}, residual {:e}", rnorm / bnorm);
            }
            if rnorm <= target {
                converged = true;
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = exec::dot(mode, &r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if !converged {
            break;
        }
        a.residual(mode, b, &x, &mut r);
        rnorm = exec::norm2(mode, &r);
        if rnorm <= target {
            return Ok((x, CgStats { iterations: it, residual: rnorm / bnorm }));
        }
        log::debug!("cg: iteration {it}, true residual {:e} above target, restarting", rnorm / bnorm);
    }
    Err(Error::Convergence { iterations: it, residual: rnorm / bnorm })
}

/// Solves the reduced system and re-inserts prescribed values.
pub fn solve_cg(system: &ConstrainedSystem, opts: &CgOptions) -> Result<(Vec<f64>, CgStats)> {
    let (x, stats) = pcg(&system.matrix, &system.rhs, opts)?;
    Ok((system.expand(&x), stats))
}
