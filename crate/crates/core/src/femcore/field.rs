use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::TriMesh;

/// Nodal values of a P1 field, one per mesh vertex.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &TriMesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        Field { values: mesh.vertices.iter().map(|&p| f(p)).collect() }
    }

    pub fn check(&self, mesh: &TriMesh) -> Result<()> {
        if self.values.len() != mesh.n_vertices() {
            return Err(Error::Parameter(format!(
                "field has {} values for {} vertices",
                self.values.len(),
                mesh.n_vertices()
            )));
        }
        Ok(())
    }

    /// Constant gradient of the field on triangle `t`.
    pub fn gradient(&self, mesh: &TriMesh, t: usize) -> [f64; 2] {
        let g = mesh.basis_gradients(t);
        let tri = mesh.triangles[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += self.values[tri[k]] * g[k][0];
            out[1] += self.values[tri[k]] * g[k][1];
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.values.len());
        for v in &self.values {
            let _ = writeln!(s, "{v:e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut it = text.split_whitespace();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("empty field".into()))?
            .parse()
            .map_err(|_| Error::Parse("bad field length".into()))?;
        let values: Vec<f64> =
            it.map(|t| t.parse().map_err(|_| Error::Parse(format!("bad field value `{t}`")))).collect::<Result<_>>()?;
        if values.len() != n {
            return Err(Error::Parse(format!("field declares {n} values, found {}", values.len())));
        }
        Ok(Field { values })
    }
}
