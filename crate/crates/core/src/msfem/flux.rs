//! Neumann data of the cell problems.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EdgeTag, ElementFrame, Point, TriMesh};
use crate::quadrature::GAUSS2;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FluxMode {
    /// Pick the branch by comparing the flux oscillation with `C * epsilon`.
    Auto,
    GeometryOnly,
    GeometryAndFlux,
}

/// Boundary flux `g_eps` and the rule deciding whether it enters the basis.
#[derive(Clone)]
pub struct FluxSpec {
    pub g: ScalarFn,
    /// Identifies `g` in cache keys and logs.
    pub label: String,
    pub epsilon: f64,
    /// Threshold constant `C`; the flux-free branch needs `sup|g - <g>| < C * epsilon`.
    pub threshold: f64,
    pub mode: FluxMode,
}

impl fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluxSpec")
            .field("label", &self.label)
            .field("epsilon", &self.epsilon)
            .field("threshold", &self.threshold)
            .field("mode", &self.mode)
            .finish()
    }
}

impl FluxSpec {
    pub fn new(g: impl Fn(Point) -> f64 + Send + Sync + 'static, label: impl Into<String>, epsilon: f64) -> Self {
        FluxSpec { g: Arc::new(g), label: label.into(), epsilon, threshold: 1.0, mode: FluxMode::Auto }
    }

    pub fn zero(epsilon: f64) -> Self {
        Self::new(|_| 0.0, "zero", epsilon)
    }

    pub fn constant(value: f64, epsilon: f64) -> Self {
        Self::new(move |_| value, format!("const:{value:e}"), epsilon)
    }

    pub fn with_mode(mut self, mode: FluxMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_threshold(mut self, c: f64) -> Self {
        self.threshold = c;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FluxBranch {
    /// `theta_p = b_p / r`.
    Geometry,
    /// `theta_p = (b_p / r) g / <g>`.
    GeometryAndFlux,
}

/// Flux data of one rough element, in rescaled coordinates.
#[derive(Clone)]
pub struct CellFlux {
    /// Rescaled length of the discrete rough polyline.
    pub r_hat: f64,
    /// `<g>` over the discrete rough polyline.
    pub mean: f64,
    /// Largest `|g - <g>|` over the quadrature points.
    pub oscillation: f64,
    pub branch: FluxBranch,
    /// Rescaled normal derivatives of the homogenized linear basis.
    pub b: [f64; 3],
    frame: ElementFrame,
    g: ScalarFn,
}

impl fmt::Debug for CellFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CellFlux")
            .field("r_hat", &self.r_hat)
            .field("mean", &self.mean)
            .field("oscillation", &self.oscillation)
            .field("branch", &self.branch)
            .field("b", &self.b)
            .finish()
    }
}

impl CellFlux {
    /// `theta_p` at a rescaled point of the rough edge.
    pub fn theta(&self, p: usize, q: Point) -> f64 {
        let base = self.b[p] / self.r_hat;
        match self.branch {
            FluxBranch::Geometry => base,
            FluxBranch::GeometryAndFlux => base * (self.g)(self.frame.to_physical(q)) / self.mean,
        }
    }

    /// `∫ theta_p ds` along the discrete rough polyline (two-point Gauss).
    pub fn integral(&self, p: usize, cell: &TriMesh) -> f64 {
        rough_segments(cell)
            .map(|(a, b)| {
                let len = seg_len(a, b);
                GAUSS2.iter().map(|&(x, w)| 0.5 * w * len * self.theta(p, lerp(a, b, 0.5 * (1.0 + x)))).sum::<f64>()
            })
            .sum()
    }
}

fn lerp(a: Point, b: Point, s: f64) -> Point {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

fn seg_len(a: Point, b: Point) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

fn rough_segments(cell: &TriMesh) -> impl Iterator<Item = (Point, Point)> + '_ {
    cell.boundary_edges
        .iter()
        .filter(|e| e.tag == EdgeTag::Rough)
        .map(|e| (cell.vertices[e.v[0]], cell.vertices[e.v[1]]))
}

/// Builds the cell-problem flux of a rough element: computes `r_hat` and
/// `<g>` on the discrete rough polyline of `cell` and selects the branch.
pub fn edge_flux_theta(frame: &ElementFrame, cell: &TriMesh, spec: &FluxSpec) -> Result<CellFlux> {
    let mut r_hat = 0.0;
    let mut integral = 0.0;
    let mut samples = Vec::new();
    for (a, b) in rough_segments(cell) {
        let len = seg_len(a, b);
        r_hat += len;
        for &(x, w) in &GAUSS2 {
            let gv = (spec.g)(frame.to_physical(lerp(a, b, 0.5 * (1.0 + x))));
            integral += 0.5 * w * len * gv;
            samples.push(gv);
        }
    }
    if !(r_hat > 0.0) {
        return Err(Error::Parameter(format!("element {}: cell mesh has no rough polyline", frame.element)));
    }
    if !(spec.epsilon > 0.0) {
        return Err(Error::Parameter(format!("flux epsilon must be positive, got {}", spec.epsilon)));
    }
    let mean = integral / r_hat;
    let oscillation = samples.iter().map(|g| (g - mean).abs()).fold(0.0, f64::max);
    let branch = match spec.mode {
        FluxMode::GeometryOnly => FluxBranch::Geometry,
        FluxMode::GeometryAndFlux => FluxBranch::GeometryAndFlux,
        FluxMode::Auto if oscillation < spec.threshold * spec.epsilon => FluxBranch::Geometry,
        FluxMode::Auto => FluxBranch::GeometryAndFlux,
    };
    if branch == FluxBranch::GeometryAndFlux {
        let sup = samples.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if !(mean.abs() >= 1e-12 * sup) || sup == 0.0 {
            return Err(Error::DegenerateMean { element: frame.element, mean, sup });
        }
    }
    Ok(CellFlux { r_hat, mean, oscillation, branch, b: frame.flux_weights(), frame: frame.clone(), g: spec.g.clone() })
}
