//! P1 stiffness, load and boundary-flux assembly.
//!
//! Element contributions are computed independently (possibly in parallel)
//! and scattered in ascending element order, so the result does not depend
//! on the execution mode.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::sparse::CsrMatrix;
use crate::geometry::{EdgeTag, Point, TriMesh};
use crate::quadrature::GAUSS2;

/// Exact P1 element stiffness `∫ ∇φ_i · ∇φ_j`.
pub fn element_stiffness(mesh: &TriMesh, t: usize) -> Result<[[f64; 3]; 3]> {
    let area = mesh.area(t);
    if !(area > 0.0) {
        return Err(Error::Assembly(format!("triangle {t} is degenerate (area {area:e})")));
    }
    let g = mesh.basis_gradients(t);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    Ok(k)
}

/// Stiffness matrix with vertex `v` mapped to dof `dofs[v]`.
pub fn assemble_stiffness_mapped(mesh: &TriMesh, dofs: &[usize], n_dof: usize, mode: ExecMode) -> Result<CsrMatrix> {
    let blocks = exec::map_indexed(mode, mesh.n_triangles(), |t| element_stiffness(mesh, t));
    let map = |tri: [usize; 3]| tri.map(|v| dofs[v]);
    let mut a = CsrMatrix::from_elements(n_dof, mesh.triangles.iter().map(|&t| map(t)));
    for (t, block) in blocks.into_iter().enumerate() {
        let block = block?;
        let d = map(mesh.triangles[t]);
        for i in 0..3 {
            for j in 0..3 {
                a.add(d[i], d[j], block[i][j]);
            }
        }
    }
    Ok(a)
}

pub fn assemble_stiffness(mesh: &TriMesh, mode: ExecMode) -> Result<CsrMatrix> {
    let dofs: Vec<usize> = (0..mesh.n_vertices()).collect();
    assemble_stiffness_mapped(mesh, &dofs, mesh.n_vertices(), mode)
}

/// Element load `∫ f φ_i` by the edge-midpoint rule (exact for quadratics).
pub fn element_load(mesh: &TriMesh, t: usize, f: &(dyn Fn(Point) -> f64 + Sync)) -> [f64; 3] {
    let [a, b, c] = mesh.corners(t);
    let mid = |p: Point, q: Point| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
    let (fab, fbc, fca) = (f(mid(a, b)), f(mid(b, c)), f(mid(c, a)));
    let w = mesh.area(t) / 6.0;
    [w * (fab + fca), w * (fab + fbc), w * (fbc + fca)]
}

pub fn assemble_load(mesh: &TriMesh, f: &(dyn Fn(Point) -> f64 + Sync), mode: ExecMode) -> Vec<f64> {
    let blocks = exec::map_indexed(mode, mesh.n_triangles(), |t| element_load(mesh, t, f));
    let mut out = vec![0.0; mesh.n_vertices()];
    for (t, b) in blocks.into_iter().enumerate() {
        for (k, &v) in mesh.triangles[t].iter().enumerate() {
            out[v] += b[k];
        }
    }
    out
}

/// `∫_e g φ` for the two endpoints of a straight edge, two-point Gauss.
pub fn edge_flux(p: Point, q: Point, g: &dyn Fn(Point) -> f64) -> [f64; 2] {
    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    let mut out = [0.0; 2];
    for &(x, w) in &GAUSS2 {
        let s = 0.5 * (1.0 + x);
        let pt = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
        let gv = g(pt) * w * 0.5 * len;
        out[0] += gv * (1.0 - s);
        out[1] += gv * s;
    }
    out
}

/// Boundary flux vector `∫_{tag} g φ_i ds`.
pub fn assemble_edge_flux(mesh: &TriMesh, tag: EdgeTag, g: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; mesh.n_vertices()];
    let mut seen = false;
    for e in mesh.boundary_edges.iter().filter(|e| e.tag == tag) {
        seen = true;
        let f = edge_flux(mesh.vertices[e.v[0]], mesh.vertices[e.v[1]], g);
        out[e.v[0]] += f[0];
        out[e.v[1]] += f[1];
    }
    if !seen {
        return Err(Error::Parameter(format!("mesh has no {} edges", tag.as_str())));
    }
    Ok(out)
}

/// Sums a vertex vector onto dofs.
pub fn fold_to_dofs(values: &[f64], dofs: &[usize], n_dof: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_dof];
    for (v, &d) in dofs.iter().enumerate() {
        out[d] += values[v];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_square_mesh;

    #[test]
    fn stiffness_annihilates_constants() {
        let mesh = build_square_mesh(6).unwrap();
        let a = assemble_stiffness(&mesh, ExecMode::Serial).unwrap();
        assert!(a.row_sums().iter().all(|s| s.abs() < 1e-13));
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a, assemble_stiffness(&mesh, ExecMode::Parallel).unwrap());
    }

    #[test]
    fn energy_of_linear_function_is_exact() {
        let mesh = build_square_mesh(5).unwrap();
        let a = assemble_stiffness(&mesh, ExecMode::Serial).unwrap();
        let u: Vec<f64> = mesh.vertices.iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let mut au = vec![0.0; u.len()];
        a.spmv(ExecMode::Serial, &u, &mut au);
        let energy: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
        assert!((energy - 5.0).abs() < 1e-12);
    }

    #[test]
    fn load_integrates_quadratics() {
        let mesh = build_square_mesh(4).unwrap();
        let load = assemble_load(&mesh, &|p: Point| p[0] * p[0], ExecMode::Serial);
        assert!((load.iter().sum::<f64>() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn edge_flux_of_linear_data() {
        let f = edge_flux([0.0, 0.0], [2.0, 0.0], &|p: Point| p[0]);
        assert!((f[0] - 2.0 / 3.0).abs() < 1e-14 && (f[1] - 4.0 / 3.0).abs() < 1e-14);
        let mesh = build_square_mesh(3).unwrap();
        let rough = assemble_edge_flux(&mesh, EdgeTag::Rough, &|_| 1.0).unwrap();
        assert!((rough.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(fold_to_dofs(&[1.0, 2.0, 3.0], &[0, 1, 0], 2), vec![4.0, 2.0]);
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let mesh = TriMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]], vec![], 1.0);
        assert!(matches!(element_stiffness(&mesh, 0), Err(Error::Assembly(_))));
    }
}
