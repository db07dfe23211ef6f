//! Multiscale basis functions on rough-edge elements.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::{self, CgOptions, Field, SparseSystem};
use crate::geometry::{build_cell_mesh, BoundaryProfile, CoarseMesh, EdgeTag, ElementFrame, TriMesh};
use crate::msfem::flux::{edge_flux_theta, FluxBranch, FluxSpec};

/// Relative residual used for cell solves.
pub const CELL_CG_TOL: f64 = 1e-12;

/// Cell solution of one rough element: three nodal fields on the rescaled
/// cell mesh, one per coarse vertex (in the element's local order).
#[derive(Debug, Clone)]
pub struct MsBasis {
    pub element: usize,
    pub frame: ElementFrame,
    pub cell: TriMesh,
    pub phi: [Field; 3],
    pub r_hat: f64,
    pub mean: f64,
    pub branch: FluxBranch,
    /// `a(Phi_p, Phi_q)`; the Dirichlet energy is invariant under rescaling.
    pub stiffness: [[f64; 3]; 3],
    pub cg_iterations: usize,
}

impl MsBasis {
    /// Values of the three basis functions at cell vertex `v`.
    pub fn at_vertex(&self, v: usize) -> [f64; 3] {
        [self.phi[0].values[v], self.phi[1].values[v], self.phi[2].values[v]]
    }
}

/// Vertices on the straight (Dirichlet) edges of a cell mesh.
pub fn dirichlet_vertices(cell: &TriMesh) -> Vec<usize> {
    cell.tagged_vertices(EdgeTag::Dirichlet)
}

/// Solves the three cell problems of a rough element: Laplace on the
/// rescaled element, linear nodal data on the straight edges and the flux
/// `theta_p` on the rough polyline.
pub fn solve_cell_basis(
    frame: &ElementFrame,
    profile: &BoundaryProfile,
    spec: &FluxSpec,
    htilde: f64,
    mode: ExecMode,
) -> Result<MsBasis> {
    let cell = build_cell_mesh(frame, profile, htilde)?;
    let flux = edge_flux_theta(frame, &cell, spec)?;
    let k = femcore::assemble_stiffness(&cell, mode)?;
    let fixed = dirichlet_vertices(&cell);
    let opts = CgOptions { tol: CELL_CG_TOL, max_iter: 50 * cell.n_vertices() + 1000, mode };
    let mut phi: [Field; 3] = Default::default();
    let mut iterations = 0;
    for p in 0..3 {
        let mut rhs = vec![0.0; cell.n_vertices()];
        for e in cell.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough) {
            let f = femcore::edge_flux(cell.vertices[e.v[0]], cell.vertices[e.v[1]], &|q| flux.theta(p, q));
            rhs[e.v[0]] += f[0];
            rhs[e.v[1]] += f[1];
        }
        let constraints: Vec<(usize, f64)> =
            fixed.iter().map(|&v| (v, frame.linear_basis(cell.vertices[v])[p])).collect();
        let system = femcore::impose_dirichlet(&SparseSystem { matrix: k.clone(), rhs }, &constraints)?;
        let (u, stats) = femcore::solve_cg(&system, &opts)?;
        iterations += stats.iterations;
        phi[p] = Field::new(u);
    }
    let mut stiffness = [[0.0; 3]; 3];
    let mut kphi = vec![0.0; cell.n_vertices()];
    for q in 0..3 {
        k.spmv(mode, &phi[q].values, &mut kphi);
        for p in 0..3 {
            stiffness[p][q] = exec::dot(mode, &phi[p].values, &kphi);
        }
    }
    // symmetrize the round-off
    for p in 0..3 {
        for q in p + 1..3 {
            let s = 0.5 * (stiffness[p][q] + stiffness[q][p]);
            stiffness[p][q] = s;
            stiffness[q][p] = s;
        }
    }
    Ok(MsBasis {
        element: frame.element,
        frame: frame.clone(),
        cell,
        phi,
        r_hat: flux.r_hat,
        mean: flux.mean,
        branch: flux.branch,
        stiffness,
        cg_iterations: iterations,
    })
}

/// Cell bases of every rough-edge element, in ascending element order.
/// Elements are solved concurrently in parallel mode.
pub fn solve_cell_bases(coarse: &CoarseMesh, spec: &FluxSpec, htilde: f64, mode: ExecMode) -> Result<Vec<MsBasis>> {
    let t1 = coarse.t1_elements();
    exec::map_indexed(mode, t1.len(), |k| {
        let t = t1[k];
        coarse
            .frame(t)
            .and_then(|frame| solve_cell_basis(&frame, &coarse.profile, spec, htilde, mode))
            .map_err(|e| Error::Cell { element: t, source: Box::new(e) })
    })
    .into_iter()
    .collect()
}
