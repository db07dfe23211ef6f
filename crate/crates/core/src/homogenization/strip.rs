//! Periodic boundary-layer problems on the truncated strip
//! `{0 < xi1 < 1, gamma(xi1) < xi2 < L}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::femcore::{self, CgOptions, Evaluator, Field, SparseSystem};
use crate::geometry::{build_strip_mesh, EdgeTag, Point, PointLocator, StripMesh, UnitCell, LOCATE_TOL};
use crate::quadrature::{self, GAUSS2};

/// Relative residual for strip solves.
pub const STRIP_CG_TOL: f64 = 1e-13;

/// Largest continuous mean of the Neumann data accepted as compatible.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StripData {
    /// `g - <g>`.
    B0,
    /// `-gamma' / sqrt(1 + gamma'^2)`.
    B1,
    /// `1 / sqrt(1 + gamma'^2) - 1/r`.
    B2,
    /// `(g / <g> - 1) / r`.
    B0Tilde,
}

impl StripData {
    pub fn needs_flux(self) -> bool {
        matches!(self, StripData::B0 | StripData::B0Tilde)
    }
}

pub type PeriodicFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct StripProblem {
    pub cell: UnitCell,
    pub data: StripData,
    /// Unit-periodic flux `g(xi1)` for `B0` / `B0Tilde`.
    pub g: Option<PeriodicFn>,
    /// Truncation height `L`.
    pub height: f64,
    /// Columns per period; the mesh size is `1/cols` in both directions.
    pub cols: usize,
    pub mode: ExecMode,
}

impl fmt::Debug for StripProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StripProblem")
            .field("cell", &self.cell)
            .field("data", &self.data)
            .field("height", &self.height)
            .field("cols", &self.cols)
            .finish()
    }
}

impl StripProblem {
    pub fn new(cell: UnitCell, data: StripData) -> Self {
        StripProblem { cell, data, g: None, height: 5.0, cols: 64, mode: ExecMode::Parallel }
    }

    pub fn with_flux(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.g = Some(Arc::new(g));
        self
    }
}

#[derive(Debug, Clone)]
pub struct StripSolution {
    pub strip: StripMesh,
    pub beta: Field,
    pub data: StripData,
    pub height: f64,
    /// Length of the discrete bottom polyline.
    pub r_hat: f64,
    /// Mean of the Neumann data over the exact curve (should vanish).
    pub continuous_mean: f64,
    /// Neumann value per bottom segment (for B1/B2; segment mean otherwise).
    pub segment_data: Vec<f64>,
}

fn seg(a: Point, b: Point) -> (f64, f64, f64) {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    (dx, dy, (dx * dx + dy * dy).sqrt())
}

fn continuous_mean(p: &StripProblem) -> Result<f64> {
    let cell = p.cell;
    let w = |t: f64| (1.0 + cell.derivative(t).powi(2)).sqrt();
    let breaks = cell.breakpoints(0.0, 1.0);
    let r = quadrature::composite_gauss5(&breaks, w);
    let mean_of = |g: &PeriodicFn| quadrature::composite_gauss5(&breaks, |t| g(t) * w(t)) / r;
    Ok(match p.data {
        StripData::B1 => quadrature::composite_gauss5(&breaks, |t| -cell.derivative(t)),
        StripData::B2 => quadrature::composite_gauss5(&breaks, |t| 1.0 - w(t) / r),
        StripData::B0 => {
            let g = p.g.as_ref().ok_or_else(|| Error::Parameter("B0 strip data needs a flux".into()))?;
            let gbar = mean_of(g);
            quadrature::composite_gauss5(&breaks, |t| (g(t) - gbar) * w(t))
        }
        StripData::B0Tilde => {
            let g = p.g.as_ref().ok_or_else(|| Error::Parameter("B0_TILDE strip data needs a flux".into()))?;
            let gbar = mean_of(g);
            let sup = quadrature::composite_gauss5(&breaks, |t| g(t).abs() * w(t)) / r;
            if !(gbar.abs() >= 1e-12 * sup) || sup == 0.0 {
                return Err(Error::DegenerateMean { element: 0, mean: gbar, sup });
            }
            quadrature::composite_gauss5(&breaks, |t| (g(t) / gbar - 1.0) / r * w(t))
        }
    })
}

/// Solves one strip problem: P1 on the periodic strip, Neumann data on the
/// rough bottom, zero at the truncation height.
///
/// The Neumann data are evaluated on the discrete bottom polyline (segment
/// normals, discrete arc length and discrete means), which makes them
/// exactly compatible at the discrete level.
pub fn solve_strip(problem: &StripProblem) -> Result<StripSolution> {
    if !(problem.height >= 1.0) {
        return Err(Error::Parameter(format!("strip height {} too small", problem.height)));
    }
    let cmean = continuous_mean(problem)?;
    if !(cmean.abs() <= COMPATIBILITY_TOL) {
        return Err(Error::Compatibility(cmean));
    }
    let strip = build_strip_mesh(&problem.cell, problem.cols, problem.height)?;
    let mesh = &strip.mesh;
    let bottom: Vec<(Point, Point)> = mesh
        .boundary_edges
        .iter()
        .filter(|e| e.tag == EdgeTag::Rough)
        .map(|e| (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]))
        .collect();
    let r_hat: f64 = bottom.iter().map(|&(a, b)| seg(a, b).2).sum();
    let gauss_mean = |g: &PeriodicFn| -> f64 {
        bottom
            .iter()
            .map(|&(a, b)| {
                let len = seg(a, b).2;
                GAUSS2.iter().map(|&(x, w)| 0.5 * w * len * g(a[0] + 0.5 * (1.0 + x) * (b[0] - a[0]))).sum::<f64>()
            })
            .sum::<f64>()
            / r_hat
    };
    let bottom = &bottom;
    // data(segment k, xi1)
    let data: Box<dyn Fn(usize, f64) -> f64 + Sync> = match problem.data {
        StripData::B1 => Box::new(|k, _| {
            let (_, dy, len) = seg(bottom[k].0, bottom[k].1);
            -dy / len
        }),
        StripData::B2 => Box::new(move |k, _| {
            let (dx, _, len) = seg(bottom[k].0, bottom[k].1);
            dx / len - 1.0 / r_hat
        }),
        StripData::B0 => {
            let g = problem.g.clone().expect("checked above");
            let gbar = gauss_mean(&g);
            Box::new(move |_, x| g(x) - gbar)
        }
        StripData::B0Tilde => {
            let g = problem.g.clone().expect("checked above");
            let gbar = gauss_mean(&g);
            let sup = (0..=problem.cols).map(|i| g(i as f64 / problem.cols as f64).abs()).fold(0.0, f64::max);
            if !(gbar.abs() >= 1e-12 * sup) || sup == 0.0 {
                return Err(Error::DegenerateMean { element: 0, mean: gbar, sup });
            }
            Box::new(move |_, x| (g(x) / gbar - 1.0) / r_hat)
        }
    };

    let mut load = vec![0.0; mesh.n_vertices()];
    let mut segment_data = Vec::with_capacity(bottom.len());
    let rough: Vec<[usize; 2]> = mesh.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough).map(|e| e.v).collect();
    for (k, &(a, b)) in bottom.iter().enumerate() {
        let f = femcore::edge_flux(a, b, &|q| data(k, q[0]));
        load[rough[k][0]] += f[0];
        load[rough[k][1]] += f[1];
        segment_data.push(0.5 * (data(k, a[0]) + data(k, b[0])));
    }
    let rhs = femcore::fold_to_dofs(&load, &strip.dof, strip.n_dof);
    let matrix = femcore::assemble_stiffness_mapped(mesh, &strip.dof, strip.n_dof, problem.mode)?;
    let top: Vec<(usize, f64)> = (0..strip.cols).map(|i| (strip.dof[strip.vertex(i, strip.rows)], 0.0)).collect();
    let system = femcore::impose_dirichlet(&SparseSystem { matrix, rhs }, &top)?;
    let opts = CgOptions { tol: STRIP_CG_TOL, max_iter: 50 * strip.n_dof + 1000, mode: problem.mode };
    let (u, _) = femcore::solve_cg(&system, &opts)?;
    let beta = Field::new(strip.dof.iter().map(|&d| u[d]).collect());
    Ok(StripSolution {
        strip,
        beta,
        data: problem.data,
        height: problem.height,
        r_hat,
        continuous_mean: cmean,
        segment_data,
    })
}

impl StripSolution {
    /// `max |beta|` over the node row nearest to height `xi2`.
    pub fn cross_section_max(&self, xi2: f64) -> f64 {
        let j = ((xi2 / self.strip.dy).round() as usize).min(self.strip.rows);
        (0..=self.strip.cols).map(|i| self.beta.values[self.strip.vertex(i, j)].abs()).fold(0.0, f64::max)
    }

    /// Exponential decay rate fitted to cross-section maxima at `heights`.
    pub fn decay_rate(&self, heights: &[f64]) -> Result<f64> {
        let ys: Vec<f64> = heights.iter().map(|&h| self.cross_section_max(h)).collect();
        if ys.iter().any(|&y| !(y > 0.0)) {
            return Err(Error::Fit(format!("non-positive cross-section maxima {ys:?}")));
        }
        let n = heights.len() as f64;
        let mx = heights.iter().sum::<f64>() / n;
        let my = ys.iter().map(|y| y.ln()).sum::<f64>() / n;
        let sxy: f64 = heights.iter().zip(&ys).map(|(x, y)| (x - mx) * (y.ln() - my)).sum();
        let sxx: f64 = heights.iter().map(|x| (x - mx).powi(2)).sum();
        Ok(-sxy / sxx)
    }

    /// Largest nodal difference to `other` on rows at or below `xi2`; the two
    /// strips must share the column count.
    pub fn max_difference_below(&self, other: &StripSolution, xi2: f64) -> Result<f64> {
        if self.strip.cols != other.strip.cols || self.strip.dy != other.strip.dy {
            return Err(Error::Parameter("strips have different resolutions".into()));
        }
        let rows = ((xi2 / self.strip.dy).round() as usize).min(self.strip.rows).min(other.strip.rows);
        let mut m: f64 = 0.0;
        for j in 0..=rows {
            for i in 0..=self.strip.cols {
                m = m.max(
                    (self.beta.values[self.strip.vertex(i, j)] - other.beta.values[other.strip.vertex(i, j)]).abs(),
                );
            }
        }
        Ok(m)
    }
}

/// Pointwise evaluation of a strip field with periodic wrap in `xi1`; zero
/// at and above the truncation height.
pub struct StripEvaluator<'a> {
    pub solution: &'a StripSolution,
    locator: PointLocator,
}

impl<'a> StripEvaluator<'a> {
    pub fn new(solution: &'a StripSolution) -> Self {
        StripEvaluator { solution, locator: PointLocator::new(&solution.strip.mesh) }
    }
}

impl Evaluator for StripEvaluator<'_> {
    fn eval(&self, xi: Point) -> Result<(f64, [f64; 2])> {
        if xi[1] >= self.solution.height {
            return Ok((0.0, [0.0; 2]));
        }
        let mesh = &self.solution.strip.mesh;
        let p = [xi[0] - xi[0].floor(), xi[1]];
        let loc = self.locator.locate_or_nearest(mesh, p, LOCATE_TOL);
        let tri = mesh.triangles[loc.triangle];
        let v = (0..3).map(|k| loc.bary[k] * self.solution.beta.values[tri[k]]).sum();
        Ok((v, self.solution.beta.gradient(mesh, loc.triangle)))
    }
}
