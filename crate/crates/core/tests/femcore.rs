mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{dense_extreme_eigenvalues, dense_solve, max_abs_diff};
use proptest::prelude::*;
use roughfem::femcore::{
    assemble_stiffness, condition_number_2norm, error_norms, impose_dirichlet, pcg, solve_cg, CgOptions, CsrMatrix,
    EigenOptions, Field, SparseSystem,
};
use roughfem::geometry::{build_reference_mesh, build_square_mesh, BoundaryProfile, EdgeTag, Point, UnitCell};
use roughfem::harness::{fit_slope, solve_p1};
use roughfem::msfem::{FluxSpec, ModelData};
use roughfem::{Error, ExecMode};

fn dirichlet_laplacian(n: usize) -> (CsrMatrix, Vec<f64>) {
    let mesh = build_square_mesh(n).unwrap();
    let matrix = assemble_stiffness(&mesh, ExecMode::Serial).unwrap();
    let rhs = vec![1.0; mesh.n_vertices()];
    let bc: Vec<(usize, f64)> = mesh.tagged_vertices(EdgeTag::Dirichlet).into_iter().map(|v| (v, 0.0)).collect();
    let c = impose_dirichlet(&SparseSystem { matrix, rhs }, &bc).unwrap();
    (c.matrix, c.rhs)
}

#[test]
fn cg_matches_dense_lu() {
    let (a, b) = dirichlet_laplacian(10);
    let (x, _) = pcg(&a, &b, &CgOptions { tol: 1e-13, ..Default::default() }).unwrap();
    let oracle = dense_solve(&a, &b);
    assert!(max_abs_diff(&x, &oracle) < 1e-11);
}

#[test]
fn condition_estimate_matches_dense_eigenvalues() {
    let (a, _) = dirichlet_laplacian(8);
    let est = condition_number_2norm(&a, &EigenOptions { tol: 1e-6, ..Default::default() }).unwrap();
    let (lo, hi) = dense_extreme_eigenvalues(&a);
    assert!((est.lambda_min - lo).abs() < 1e-8 * hi, "{} vs {lo}", est.lambda_min);
    assert!((est.lambda_max - hi).abs() < 1e-4 * hi, "{} vs {hi}", est.lambda_max);
    assert!((est.cond - hi / lo).abs() < 1e-3 * hi / lo);
}

#[test]
fn p1_convergence_on_manufactured_solution() {
    // u = cos(pi x)(1 - y)^2 + x, Neumann data on the bottom
    let u = |p: Point| (PI * p[0]).cos() * (1.0 - p[1]).powi(2) + p[0];
    let grad =
        |p: Point| [-PI * (PI * p[0]).sin() * (1.0 - p[1]).powi(2) + 1.0, -2.0 * (PI * p[0]).cos() * (1.0 - p[1])];
    let data = ModelData {
        f: Arc::new(|p: Point| (PI * PI * (1.0 - p[1]).powi(2) - 2.0) * (PI * p[0]).cos()),
        flux: FluxSpec::new(|p: Point| 2.0 * (PI * p[0]).cos(), "manufactured", 1.0),
        dirichlet: Arc::new(u),
    };
    let exact = |p: Point| -> roughfem::Result<(f64, [f64; 2])> { Ok((u(p), grad(p))) };
    let (mut hs, mut l2, mut h1) = (vec![], vec![], vec![]);
    for n in [8, 16, 32, 64] {
        let mesh = build_square_mesh(n).unwrap();
        let (uh, _) = solve_p1(&mesh, &data, &CgOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let e = error_norms(&mesh, &uh, &exact, ExecMode::Parallel).unwrap();
        hs.push(1.0 / n as f64);
        l2.push(e.l2);
        h1.push(e.h1);
    }
    let slope = |e: &[f64]| fit_slope(&hs.iter().copied().zip(e.iter().copied()).collect::<Vec<_>>()).unwrap().slope;
    let (sl2, sh1) = (slope(&l2), slope(&h1));
    assert!((sl2 - 2.0).abs() < 0.1, "L2 slope {sl2}");
    assert!((sh1 - 1.0).abs() < 0.1, "H1 slope {sh1}");
}

#[test]
fn rough_domain_p1_reproduces_linear_solutions() {
    // u = 2 - x + 3y is harmonic; its normal derivative on the rough curve
    // is not constant, so use the flat-chord edges' exact outward flux.
    let p = BoundaryProfile::periodic(UnitCell::cosine(0.1), 0.25).unwrap();
    let mesh = build_reference_mesh(&p, 1.0 / 20.0).unwrap();
    let lin = |q: Point| 2.0 - q[0] + 3.0 * q[1];
    let n = mesh.n_vertices();
    let matrix = assemble_stiffness(&mesh, ExecMode::Serial).unwrap();
    let mut rhs = vec![0.0; n];
    for e in mesh.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Rough) {
        let (a, b) = (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        // outward normal of a left-to-right bottom edge is (dy, -dx)/len
        let flux = 0.5 * (-dy - 3.0 * dx);
        rhs[e.v[0]] += flux;
        rhs[e.v[1]] += flux;
    }
    let bc: Vec<(usize, f64)> =
        mesh.tagged_vertices(EdgeTag::Dirichlet).into_iter().map(|v| (v, lin(mesh.vertices[v]))).collect();
    let c = impose_dirichlet(&SparseSystem { matrix, rhs }, &bc).unwrap();
    let (u, _) = solve_cg(&c, &CgOptions { tol: 1e-13, ..Default::default() }).unwrap();
    let expect = Field::interpolate(&mesh, lin);
    assert!(max_abs_diff(&u, &expect.values) < 1e-9);
}

#[test]
fn singular_neumann_system_is_not_spd() {
    // pure Neumann Laplacian: CG on the exact kernel reports a breakdown
    let mesh = build_square_mesh(4).unwrap();
    let a = assemble_stiffness(&mesh, ExecMode::Serial).unwrap();
    let ones = vec![1.0; a.n_rows];
    assert!(matches!(pcg(&a, &ones, &CgOptions::default()), Err(Error::Convergence { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn stiffness_is_symmetric_psd_with_constant_kernel(seed in 0u64..500, n in 3usize..10) {
        let p = BoundaryProfile::random(6, seed, true, 0.5, 1.0 / 8.0).unwrap();
        let mesh = build_reference_mesh(&p, 1.0 / (4 * n) as f64).unwrap();
        let a = assemble_stiffness(&mesh, ExecMode::Parallel).unwrap();
        prop_assert!(a.asymmetry() < 1e-14);
        prop_assert!(a.row_sums().iter().all(|s| s.abs() < 1e-11));
        let x: Vec<f64> = (0..a.n_rows).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        let mut ax = vec![0.0; a.n_rows];
        a.spmv(ExecMode::Serial, &x, &mut ax);
        prop_assert!(x.iter().zip(&ax).map(|(u, v)| u * v).sum::<f64>() >= -1e-12);
    }

    #[test]
    fn serial_and_parallel_solves_agree(n in 4usize..16) {
        let (a, b) = dirichlet_laplacian(n);
        let s = pcg(&a, &b, &CgOptions { mode: ExecMode::Serial, ..Default::default() }).unwrap();
        let p = pcg(&a, &b, &CgOptions { mode: ExecMode::Parallel, ..Default::default() }).unwrap();
        prop_assert_eq!(s.0, p.0);
    }
}
