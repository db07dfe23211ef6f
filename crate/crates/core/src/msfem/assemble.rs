//! Global MsFEM system: multiscale blocks on rough-edge elements, P1 blocks
//! elsewhere.

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::femcore::{self, CgOptions, CgStats, ConstrainedSystem, CsrMatrix, Field, SparseSystem};
use crate::geometry::{CoarseMesh, EdgeTag, ElementClass, Point};
use crate::msfem::basis::MsBasis;
use crate::msfem::flux::{FluxSpec, ScalarFn};

/// Source, boundary flux and Dirichlet data of the model problem.
#[derive(Clone)]
pub struct ModelData {
    pub f: ScalarFn,
    pub flux: FluxSpec,
    pub dirichlet: ScalarFn,
}

/// Index of the basis owned by each coarse element.
pub fn basis_index(coarse: &CoarseMesh, bases: &[MsBasis]) -> Result<Vec<Option<usize>>> {
    let mut index = vec![None; coarse.mesh.n_triangles()];
    for (k, b) in bases.iter().enumerate() {
        if b.element >= index.len() {
            return Err(Error::Assembly(format!("basis for unknown element {}", b.element)));
        }
        index[b.element] = Some(k);
    }
    for t in 0..coarse.mesh.n_triangles() {
        if coarse.mesh.classes[t] == ElementClass::T1 && index[t].is_none() {
            return Err(Error::Assembly(format!("rough-edge element {t} has no multiscale basis")));
        }
    }
    Ok(index)
}

/// `(f, Phi_p)` and `(g, Phi_p)` over a rough element, integrated on its cell mesh.
pub fn cell_load(
    basis: &MsBasis,
    f: &(dyn Fn(Point) -> f64 + Sync),
    g: &(dyn Fn(Point) -> f64 + Sync),
) -> ([f64; 3], [f64; 3]) {
    let frame = &basis.frame;
    let s = frame.scale;
    let fl = femcore::assemble_load(&basis.cell, &|q| f(frame.to_physical(q)), ExecMode::Serial);
    let mut gl = vec![0.0; basis.cell.n_vertices()];
    for e in basis.cell.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough) {
        let v =
            femcore::edge_flux(basis.cell.vertices[e.v[0]], basis.cell.vertices[e.v[1]], &|q| g(frame.to_physical(q)));
        gl[e.v[0]] += v[0];
        gl[e.v[1]] += v[1];
    }
    let mut load = [0.0; 3];
    let mut flux = [0.0; 3];
    for p in 0..3 {
        let phi = &basis.phi[p].values;
        load[p] = s * s * phi.iter().zip(&fl).map(|(a, b)| a * b).sum::<f64>();
        flux[p] = s * phi.iter().zip(&gl).map(|(a, b)| a * b).sum::<f64>();
    }
    (load, flux)
}

/// Unconstrained MsFEM stiffness and right-hand side.
pub fn assemble_msfem(
    coarse: &CoarseMesh,
    bases: &[MsBasis],
    data: &ModelData,
    mode: ExecMode,
) -> Result<SparseSystem> {
    let mesh = &coarse.mesh;
    let index = basis_index(coarse, bases)?;
    let f = data.f.as_ref();
    let g = data.flux.g.as_ref();
    let blocks = exec::map_indexed(mode, mesh.n_triangles(), |t| -> Result<([[f64; 3]; 3], [f64; 3])> {
        match index[t] {
            Some(k) => {
                let b = &bases[k];
                let (load, flux) = cell_load(b, f, g);
                Ok((b.stiffness, [load[0] + flux[0], load[1] + flux[1], load[2] + flux[2]]))
            }
            None => Ok((femcore::element_stiffness(mesh, t)?, femcore::element_load(mesh, t, f))),
        }
    });
    let mut matrix = CsrMatrix::from_elements(mesh.n_vertices(), mesh.triangles.iter().copied());
    let mut rhs = vec![0.0; mesh.n_vertices()];
    for (t, block) in blocks.into_iter().enumerate() {
        let (k, l) = block?;
        let tri = mesh.triangles[t];
        for i in 0..3 {
            rhs[tri[i]] += l[i];
            for j in 0..3 {
                matrix.add(tri[i], tri[j], k[i][j]);
            }
        }
    }
    Ok(SparseSystem { matrix, rhs })
}

/// Dirichlet constraints on the straight part of the boundary.
pub fn dirichlet_constraints(coarse: &CoarseMesh, dirichlet: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<(usize, f64)> {
    coarse
        .mesh
        .tagged_vertices(EdgeTag::Dirichlet)
        .into_iter()
        .map(|v| (v, dirichlet(coarse.mesh.vertices[v])))
        .collect()
}

#[derive(Debug, Clone)]
pub struct MsfemSolution {
    pub coeffs: Field,
    pub system: SparseSystem,
    pub reduced: ConstrainedSystem,
    pub stats: CgStats,
}

impl MsfemSolution {
    /// Largest `|a(u_h, Phi_p) - F(Phi_p)|` over free coarse vertices,
    /// relative to `|F|`.
    pub fn galerkin_residual(&self) -> f64 {
        let n = self.coeffs.values.len();
        let mut au = vec![0.0; n];
        self.system.matrix.spmv(ExecMode::Serial, &self.coeffs.values, &mut au);
        let scale = self.reduced.rhs.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let r: f64 = self.reduced.free.iter().map(|&i| (au[i] - self.system.rhs[i]).powi(2)).sum::<f64>().sqrt();
        r / scale
    }
}

/// Assembles, constrains and solves the MsFEM system.
pub fn solve_msfem(
    coarse: &CoarseMesh,
    bases: &[MsBasis],
    data: &ModelData,
    opts: &CgOptions,
) -> Result<MsfemSolution> {
    let system = assemble_msfem(coarse, bases, data, opts.mode)?;
    let reduced = femcore::impose_dirichlet(&system, &dirichlet_constraints(coarse, data.dirichlet.as_ref()))?;
    let (u, stats) = femcore::solve_cg(&reduced, opts)?;
    Ok(MsfemSolution { coeffs: Field::new(u), system, reduced, stats })
}
