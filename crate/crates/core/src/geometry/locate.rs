//! Bucket-grid point location with barycentric coordinates.

use crate::error::{Error, Result};
use crate::geometry::mesh::{Point, TriMesh};

/// Default containment tolerance on barycentric coordinates.
pub const LOCATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
    /// False when the point lies outside every triangle and the closest
    /// triangle was used instead (values are then linearly extrapolated).
    pub inside: bool,
}

#[derive(Debug, Clone)]
pub struct PointLocator {
    lo: Point,
    cell: [f64; 2],
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl PointLocator {
    pub fn new(mesh: &TriMesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let nt = mesh.n_triangles().max(1);
        let side = ((nt as f64) / 2.0).sqrt().ceil().max(1.0) as usize;
        let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
        let aspect = span[0] / span[1];
        let nx = ((side as f64) * aspect.sqrt()).ceil().clamp(1.0, 4096.0) as usize;
        let ny = ((side as f64) / aspect.sqrt()).ceil().clamp(1.0, 4096.0) as usize;
        let cell = [span[0] / nx as f64, span[1] / ny as f64];
        let mut loc = PointLocator { lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for t in 0..mesh.n_triangles() {
            let c = mesh.corners(t);
            let (mut bl, mut bh) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in c {
                for d in 0..2 {
                    bl[d] = bl[d].min(p[d]);
                    bh[d] = bh[d].max(p[d]);
                }
            }
            let pad = 1e-9 * (span[0] + span[1]);
            let (i0, j0) = loc.bucket([bl[0] - pad, bl[1] - pad]);
            let (i1, j1) = loc.bucket([bh[0] + pad, bh[1] + pad]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(t as u32);
                }
            }
        }
        loc
    }

    fn bucket(&self, p: Point) -> (usize, usize) {
        let fx = ((p[0] - self.lo[0]) / self.cell[0]).floor();
        let fy = ((p[1] - self.lo[1]) / self.cell[1]).floor();
        (fx.clamp(0.0, (self.nx - 1) as f64) as usize, fy.clamp(0.0, (self.ny - 1) as f64) as usize)
    }

    /// Lowest-index triangle containing `p` within `tol`.
    pub fn locate(&self, mesh: &TriMesh, p: Point, tol: f64) -> Result<Location> {
        self.find(mesh, p, tol).ok_or(Error::Location { x: p[0], y: p[1] })
    }

    fn find(&self, mesh: &TriMesh, p: Point, tol: f64) -> Option<Location> {
        let (i, j) = self.bucket(p);
        for &t in &self.buckets[j * self.nx + i] {
            let t = t as usize;
            let l = mesh.barycentric(t, p);
            if l.iter().all(|&x| x >= -tol) {
                return Some(Location { triangle: t, bary: l, inside: true });
            }
        }
        None
    }

    /// Like [`locate`](Self::locate), but falls back to the triangle whose
    /// most negative barycentric coordinate is largest among nearby buckets.
    pub fn locate_or_nearest(&self, mesh: &TriMesh, p: Point, tol: f64) -> Location {
        if let Some(l) = self.find(mesh, p, tol) {
            return l;
        }
        let (i, j) = self.bucket(p);
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        let mut ring = 1usize;
        loop {
            let (i0, i1) = (i.saturating_sub(ring), (i + ring).min(self.nx - 1));
            let (j0, j1) = (j.saturating_sub(ring), (j + ring).min(self.ny - 1));
            for jj in j0..=j1 {
                for ii in i0..=i1 {
                    for &t in &self.buckets[jj * self.nx + ii] {
                        let t = t as usize;
                        let l = mesh.barycentric(t, p);
                        let worst = l.iter().copied().fold(f64::INFINITY, f64::min);
                        let better = match best {
                            None => true,
                            Some((w, bt, _)) => worst > w || (worst == w && t < bt),
                        };
                        if better {
                            best = Some((worst, t, l));
                        }
                    }
                }
            }
            let exhausted = i0 == 0 && j0 == 0 && i1 == self.nx - 1 && j1 == self.ny - 1;
            if best.is_some() || exhausted {
                break;
            }
            ring *= 2;
        }
        let (_, t, l) = best.expect("mesh has at least one triangle");
        Location { triangle: t, bary: l, inside: false }
    }
}

/// One-shot point location (builds a locator).
pub fn locate_point(mesh: &TriMesh, p: Point) -> Result<Location> {
    PointLocator::new(mesh).locate(mesh, p, LOCATE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_coarse_mesh, BoundaryProfile, UnitCell};

    #[test]
    fn located_barycentrics_reconstruct_the_point() {
        let profile = BoundaryProfile::periodic(UnitCell::cosine(0.1), 0.125).unwrap();
        let mesh = build_coarse_mesh(&profile, 8).unwrap().mesh;
        let loc = PointLocator::new(&mesh);
        for k in 0..200 {
            let p = [(k as f64 * 0.618_034) % 1.0, 0.05 + (k as f64 * 0.414_214) % 0.9];
            let l = loc.locate(&mesh, p, LOCATE_TOL).unwrap();
            assert!(l.inside && l.bary.iter().all(|&b| b >= -LOCATE_TOL));
            let c = mesh.corners(l.triangle);
            for d in 0..2 {
                let x: f64 = (0..3).map(|i| l.bary[i] * c[i][d]).sum();
                assert!((x - p[d]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outside_points_fail_or_snap() {
        let mesh = build_coarse_mesh(&BoundaryProfile::flat(), 3).unwrap().mesh;
        assert!(matches!(locate_point(&mesh, [0.5, 1.5]), Err(Error::Location { .. })));
        let l = PointLocator::new(&mesh).locate_or_nearest(&mesh, [0.5, 1.5], LOCATE_TOL);
        assert!(!l.inside);
        assert!((l.bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
