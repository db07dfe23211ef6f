use crate::error::Result;
use crate::femcore::{self, CgOptions, CgStats, Field, SparseSystem};
use crate::geometry::{build_square_mesh, EdgeTag, TriMesh};
use crate::msfem::ScalarFn;

/// Problem on the unit square with the effective flux on its flat bottom.
#[derive(Clone)]
pub struct HomogenizedCase {
    pub f: ScalarFn,
    /// Constant Neumann datum `r <g>` on the bottom edge.
    pub flux: f64,
    pub dirichlet: ScalarFn,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct HomogenizedSolution {
    pub mesh: TriMesh,
    pub u: Field,
    pub stats: CgStats,
}

pub fn solve_homogenized(case: &HomogenizedCase, opts: &CgOptions) -> Result<HomogenizedSolution> {
    let mesh = build_square_mesh(case.n)?;
    let matrix = femcore::assemble_stiffness(&mesh, opts.mode)?;
    let mut rhs = femcore::assemble_load(&mesh, case.f.as_ref(), opts.mode);
    let flux = case.flux;
    let g = femcore::assemble_edge_flux(&mesh, EdgeTag::Rough, &|_| flux)?;
    rhs.iter_mut().zip(&g).for_each(|(r, g)| *r += g);
    let constraints: Vec<(usize, f64)> =
        mesh.tagged_vertices(EdgeTag::Dirichlet).into_iter().map(|v| (v, (case.dirichlet)(mesh.vertices[v]))).collect();
    let system = femcore::impose_dirichlet(&SparseSystem { matrix, rhs }, &constraints)?;
    let (u, stats) = femcore::solve_cg(&system, opts)?;
    Ok(HomogenizedSolution { mesh, u: Field::new(u), stats })
}
