use crate::error::{Error, Result};
use crate::harness::record::ConvergenceRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least three points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Fit(format!("non-positive value in ({}, {})", p.0, p.1)));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / n).sqrt() })
}

/// Log-log slope of column `y` against column `x` over the records that
/// have both, optionally restricted by `keep`.
pub fn fit_records(
    records: &[ConvergenceRecord],
    x: &str,
    y: &str,
    keep: impl Fn(&ConvergenceRecord) -> bool,
) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> =
        records.iter().filter(|r| keep(r)).filter_map(|r| Some((r.get(x)?, r.get(y)?))).collect();
    fit_slope(&pts)
}
