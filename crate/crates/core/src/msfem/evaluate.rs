//! Pointwise evaluation of the composite MsFEM solution.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::Result;
use crate::femcore::{Evaluator, Field};
use crate::geometry::{CoarseMesh, ElementClass, Location, Point, PointLocator, TriMesh, LOCATE_TOL};
use crate::msfem::basis::MsBasis;

/// `u_h = sum_p u_p Phi_p`: multiscale on rough-edge elements, linear elsewhere.
pub struct MsfemEvaluator<'a> {
    coarse: &'a CoarseMesh,
    coeffs: &'a Field,
    bases: &'a [MsBasis],
    plain: TriMesh,
    plain_ids: Vec<usize>,
    plain_locator: PointLocator,
    cell_locators: Vec<PointLocator>,
    /// Basis index per bottom column.
    columns: Vec<usize>,
    fallbacks: AtomicUsize,
}

impl<'a> MsfemEvaluator<'a> {
    pub fn new(coarse: &'a CoarseMesh, coeffs: &'a Field, bases: &'a [MsBasis]) -> Result<Self> {
        coeffs.check(&coarse.mesh)?;
        crate::msfem::assemble::basis_index(coarse, bases)?;
        let mesh = &coarse.mesh;
        let plain_ids: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| mesh.classes[t] != ElementClass::T1).collect();
        let plain = TriMesh {
            vertices: mesh.vertices.clone(),
            triangles: plain_ids.iter().map(|&t| mesh.triangles[t]).collect(),
            boundary_edges: Vec::new(),
            classes: vec![ElementClass::T3; plain_ids.len()],
            h: mesh.h,
        };
        let plain_locator = PointLocator::new(&plain);
        let mut columns = vec![usize::MAX; coarse.n];
        for (k, b) in bases.iter().enumerate() {
            let i = ((b.frame.interval.0 * coarse.n as f64).round() as usize).min(coarse.n - 1);
            columns[i] = k;
        }
        let cell_locators = bases.iter().map(|b| PointLocator::new(&b.cell)).collect();
        Ok(MsfemEvaluator {
            coarse,
            coeffs,
            bases,
            plain,
            plain_ids,
            plain_locator,
            cell_locators,
            columns,
            fallbacks: AtomicUsize::new(0),
        })
    }

    /// Evaluations that fell outside every cell mesh (sliver between the
    /// discrete and the true rough curve) and used the nearest cell triangle.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    fn cell_value(&self, k: usize, loc: Location) -> (f64, [f64; 2]) {
        let b = &self.bases[k];
        let tri = b.cell.triangles[loc.triangle];
        let coarse_tri = self.coarse.mesh.triangles[b.element];
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for p in 0..3 {
            let u = self.coeffs.values[coarse_tri[p]];
            let phi = &b.phi[p];
            v += u * (0..3).map(|j| loc.bary[j] * phi.values[tri[j]]).sum::<f64>();
            let gp = phi.gradient(&b.cell, loc.triangle);
            g[0] += u * gp[0] / b.frame.scale;
            g[1] += u * gp[1] / b.frame.scale;
        }
        (v, g)
    }

    fn column_candidates(&self, x1: f64) -> Vec<usize> {
        let n = self.coarse.n;
        let s = (x1 * n as f64).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let mut c = vec![i];
        if s - (i as f64) < 1e-9 && i > 0 {
            c.push(i - 1);
        }
        if (i + 1) as f64 - s < 1e-9 && i + 1 < n {
            c.push(i + 1);
        }
        c.into_iter().map(|i| self.columns[i]).filter(|&k| k != usize::MAX).collect()
    }
}

impl Evaluator for MsfemEvaluator<'_> {
    fn eval(&self, p: Point) -> Result<(f64, [f64; 2])> {
        if let Ok(loc) = self.plain_locator.locate(&self.plain, p, LOCATE_TOL) {
            let t = self.plain_ids[loc.triangle];
            let tri = self.coarse.mesh.triangles[t];
            let v = (0..3).map(|k| loc.bary[k] * self.coeffs.values[tri[k]]).sum();
            return Ok((v, self.coeffs.gradient(&self.coarse.mesh, t)));
        }
        let candidates = self.column_candidates(p[0]);
        for &k in &candidates {
            let b = &self.bases[k];
            if let Ok(loc) = self.cell_locators[k].locate(&b.cell, b.frame.to_local(p), LOCATE_TOL) {
                return Ok(self.cell_value(k, loc));
            }
        }
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        let k = candidates[0];
        let b = &self.bases[k];
        let loc = self.cell_locators[k].locate_or_nearest(&b.cell, b.frame.to_local(p), LOCATE_TOL);
        Ok(self.cell_value(k, loc))
    }
}
