use std::path::PathBuf;

/// Errors raised across geometry construction, assembly, solves and experiments.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("mesh error at element {element}: {reason}")]
    Mesh { element: usize, reason: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("constraint error: node {node} prescribed both {first} and {second}")]
    Constraint { node: usize, first: f64, second: f64 },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("eigenvalue estimation failed: {0}")]
    Estimation(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    Location { x: f64, y: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error(
        "degenerate flux mean on element {element}: |<g>| = {mean:e} while |g|_inf = {sup:e}; \
         the oscillating flux is not well-defined when <g> = 0. Split g = g1 + g2 with a \
         nonzero-mean part (e.g. g1 = 1, g2 = g - 1) and solve the two problems separately"
    )]
    DegenerateMean { element: usize, mean: f64, sup: f64 },

    #[error("compatibility error: Neumann data has mean {0:e} over the period")]
    Compatibility(f64),

    #[error("cell problem on element {element} failed: {source}")]
    Cell {
        element: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("experiment stage `{stage}` failed (N = {n:?}): {source}")]
    Experiment {
        stage: String,
        n: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at_stage(self, stage: &str, n: Option<usize>) -> Self {
        Error::Experiment { stage: stage.to_string(), n, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
