//! Discrete L2 / H1-seminorm errors between a fine P1 field and an arbitrary
//! candidate evaluated pointwise.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::field::Field;
use crate::geometry::{Point, PointLocator, TriMesh, LOCATE_TOL};

/// Pointwise value and gradient of a candidate solution.
pub trait Evaluator: Sync {
    fn eval(&self, p: Point) -> Result<(f64, [f64; 2])>;
}

impl<F> Evaluator for F
where
    F: Fn(Point) -> Result<(f64, [f64; 2])> + Sync,
{
    fn eval(&self, p: Point) -> Result<(f64, [f64; 2])> {
        self(p)
    }
}

/// P1 field evaluated by point location. Points outside the mesh use the
/// nearest triangle's linear extension; such hits are counted.
pub struct P1Evaluator<'a> {
    pub mesh: &'a TriMesh,
    pub field: &'a Field,
    locator: PointLocator,
    extended: AtomicUsize,
}

impl<'a> P1Evaluator<'a> {
    pub fn new(mesh: &'a TriMesh, field: &'a Field) -> Result<Self> {
        field.check(mesh)?;
        Ok(P1Evaluator { mesh, field, locator: PointLocator::new(mesh), extended: AtomicUsize::new(0) })
    }

    /// Number of evaluations that fell outside the mesh.
    pub fn extended_hits(&self) -> usize {
        self.extended.load(Ordering::Relaxed)
    }
}

impl Evaluator for P1Evaluator<'_> {
    fn eval(&self, p: Point) -> Result<(f64, [f64; 2])> {
        let loc = self.locator.locate_or_nearest(self.mesh, p, LOCATE_TOL);
        if !loc.inside {
            self.extended.fetch_add(1, Ordering::Relaxed);
        }
        let tri = self.mesh.triangles[loc.triangle];
        let v: f64 = (0..3).map(|k| loc.bary[k] * self.field.values[tri[k]]).sum();
        Ok((v, self.field.gradient(self.mesh, loc.triangle)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// H1 seminorm of the difference.
    pub h1: f64,
}

/// Errors `||ref - cand||_{L2}` (edge-midpoint rule) and
/// `||grad ref - grad cand||_{L2}` (centroid rule) over the fine mesh.
pub fn error_norms(fine: &TriMesh, reference: &Field, candidate: &dyn Evaluator, mode: ExecMode) -> Result<ErrorNorms> {
    reference.check(fine)?;
    let chunks = fine.n_triangles().div_ceil(exec::CHUNK);
    let parts = exec::map_indexed(mode, chunks, |c| -> Result<[f64; 2]> {
        let end = ((c + 1) * exec::CHUNK).min(fine.n_triangles());
        let mut s = [0.0; 2];
        for t in c * exec::CHUNK..end {
            let tri = fine.triangles[t];
            let [a, b, cc] = fine.corners(t);
            let u = tri.map(|v| reference.values[v]);
            let area = fine.area(t);
            let wrap = |e: Error| Error::Assembly(format!("candidate evaluation on fine triangle {t}: {e}"));
            let mut l2 = 0.0;
            for (p, q, k, l) in [(a, b, 0, 1), (b, cc, 1, 2), (cc, a, 2, 0)] {
                let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                let (cv, _) = candidate.eval(m).map_err(wrap)?;
                l2 += (0.5 * (u[k] + u[l]) - cv).powi(2);
            }
            s[0] += area / 3.0 * l2;
            let (_, cg) = candidate.eval(fine.centroid(t)).map_err(wrap)?;
            let rg = reference.gradient(fine, t);
            s[1] += area * ((rg[0] - cg[0]).powi(2) + (rg[1] - cg[1]).powi(2));
        }
        Ok(s)
    });
    let mut total = [0.0; 2];
    for p in parts {
        let p = p?;
        total[0] += p[0];
        total[1] += p[1];
    }
    Ok(ErrorNorms { l2: total[0].sqrt(), h1: total[1].sqrt() })
}
