//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Reference solutions and cell bases are cached under the Cargo
//! target tmp directory.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use roughfem::femcore::{assemble_edge_flux, assemble_stiffness, CgOptions};
use roughfem::geometry::{build_coarse_mesh, BoundaryProfile, EdgeTag, Point};
use roughfem::harness::{
    case_setup, example_cell, fit_records, reference_error_estimate, run_experiment, run_homog_rates, solve_p1,
    solve_reference, to_csv, Case, ConvergenceRecord, ExperimentConfig,
};
use roughfem::homogenization::effective_flux;
use roughfem::msfem::{edge_flux_theta, solve_cell_bases, solve_cell_basis, solve_msfem, FluxSpec, ModelData, MsBasis};
use roughfem::ExecMode;

/// Adaptive Simpson with forced refinement of the first levels, so the
/// periodic arc-length integrand cannot end the recursion early.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || (depth < 42 && delta.abs() <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

type Outcome = roughfem::Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

const DESK_EPS: f64 = 1.0 / 64.0;
const DESK_N: [usize; 4] = [5, 10, 20, 40];
/// Reference mesh size for EX2 and the homogenization rates. The default
/// `eps / 10` reference has H1 errors comparable to the errors measured there.
const FINE_REFERENCE: f64 = 1.0 / 1280.0;

fn cache_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-cache")
}

fn desk(case: Case) -> ExperimentConfig {
    ExperimentConfig {
        epsilon: DESK_EPS,
        n_list: DESK_N.to_vec(),
        cache: Some(cache_dir()),
        timings: false,
        ..ExperimentConfig::for_case(case)
    }
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn coarser_than_two_eps(r: &ConvergenceRecord) -> bool {
    r.h.is_some_and(|h| h > 2.0 * r.eps)
}

fn degeneration() -> Outcome {
    let t = Instant::now();
    let (mut dm, mut du) = (0.0f64, 0.0f64);
    let flat = BoundaryProfile::flat();
    for (n, g) in [(4, 0.0), (6, 1.0), (9, -2.5), (12, 0.75)] {
        let coarse = build_coarse_mesh(&flat, n)?;
        let spec = FluxSpec::constant(g, 1.0 / 64.0);
        let bases = solve_cell_bases(&coarse, &spec, 1.0 / (20.0 * n as f64), ExecMode::Parallel)?;
        // linear f keeps both load quadratures exact, so only the bases differ
        let data = ModelData {
            f: Arc::new(|p: Point| 1.0 + p[0] - 0.5 * p[1]),
            flux: spec,
            dirichlet: Arc::new(|p: Point| p[0] - 0.5 * p[1]),
        };
        let ms = solve_msfem(&coarse, &bases, &data, &CgOptions::default())?;
        let p1 = assemble_stiffness(&coarse.mesh, ExecMode::Parallel)?;
        dm = dm.max(max_abs_diff(&ms.system.matrix.values, &p1.values));
        let (u, _) = solve_p1(&coarse.mesh, &data, &CgOptions::default())?;
        du = du.max(max_abs_diff(&ms.coeffs.values, &u.values));
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        dm <= 1e-8 && du <= 1e-8 && secs < 5.0,
        format!("matrix diff {dm:.1e}, solution diff {du:.1e} (<= 1e-8); {secs:.2} s (< 5 s)"),
    ))
}

/// Worst partition-of-unity defect, whether the nodal and Dirichlet values
/// are exact, and the worst discrete flux defect of one basis.
fn basis_defects(b: &MsBasis, spec: &FluxSpec) -> roughfem::Result<(f64, bool, f64)> {
    let pu = (0..b.cell.n_vertices()).map(|v| (b.at_vertex(v).iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    let mut exact = true;
    for q in 0..3 {
        let c = b.frame.local[q];
        let v = (0..b.cell.n_vertices())
            .min_by(|&i, &j| {
                let d = |v: usize| (b.cell.vertices[v][0] - c[0]).hypot(b.cell.vertices[v][1] - c[1]);
                d(i).total_cmp(&d(j))
            })
            .expect("cell mesh has vertices");
        exact &= (0..3).all(|p| b.at_vertex(v)[p] == if p == q { 1.0 } else { 0.0 });
    }
    for v in b.cell.tagged_vertices(EdgeTag::Dirichlet) {
        exact &= b.at_vertex(v) == b.frame.linear_basis(b.cell.vertices[v]);
    }
    let flux = edge_flux_theta(&b.frame, &b.cell, spec)?;
    let mut fd = 0.0f64;
    for p in 0..3 {
        let total: f64 = assemble_edge_flux(&b.cell, EdgeTag::Rough, &|q| flux.theta(p, q))?.iter().sum();
        fd = fd.max((total - flux.b[p]).abs());
    }
    Ok((pu, exact, fd))
}

fn basis_invariants() -> Outcome {
    let t = Instant::now();
    let eps = 1.0 / 16.0;
    let mut rng = Pcg64::seed_from_u64(2024);
    let (mut pu, mut exact, mut fd) = (0.0f64, true, 0.0f64);
    for _ in 0..50 {
        let seed = rng.next_u64();
        let n = 3 + (rng.next_u64() % 8) as usize;
        let profile = BoundaryProfile::random(16, seed, rng.next_u64() % 2 == 0, 0.5, eps)?;
        let coarse = build_coarse_mesh(&profile, n)?;
        let t1 = coarse.t1_elements();
        let frame = coarse.frame(t1[(rng.next_u64() % t1.len() as u64) as usize])?;
        let osc = FluxSpec::new(move |p: Point| 0.5 * (1.0 - (2.0 * PI * p[0] / eps).cos()), "osc", eps);
        for spec in [FluxSpec::zero(eps), osc] {
            let b = solve_cell_basis(&frame, &profile, &spec, eps / 8.0, ExecMode::Parallel)?;
            let (p, e, f) = basis_defects(&b, &spec)?;
            pu = pu.max(p);
            exact &= e;
            fd = fd.max(f);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        pu <= 1e-8 && exact && fd <= 1e-10 && secs < 30.0,
        format!(
            "50 elements x 2 flux branches: unity {pu:.1e} (<= 1e-8), nodal/Dirichlet exact {exact}, \
             flux {fd:.1e} (<= 1e-10); {secs:.1} s (< 30 s)"
        ),
    ))
}

fn effective_data() -> Outcome {
    let cell = example_cell();
    let w = move |t: f64| cell.derivative(t).hypot(1.0);
    let oracle = adaptive_simpson(&w, 0.0, 1.0, 1e-14);
    let r = effective_flux(&cell, &|_| 1.0).r;
    let setup = case_setup(Case::Ex2, DESK_EPS, 0)?;
    let g = setup.g_periodic.expect("EX2 has a periodic flux");
    let e = effective_flux(&cell, g.as_ref());
    let (d_stated, d_oracle, d_half) = ((r - 1.01).abs(), (r - oracle).abs(), (e.flux - e.r / 2.0).abs());
    Ok((
        d_stated <= 0.005 && d_oracle <= 1e-10 && d_half <= 1e-10,
        format!(
            "r = {r:.13}: |r - 1.01| = {d_stated:.4} (<= 0.005), |r - quadrature| = {d_oracle:.1e} (<= 1e-10), \
             |flux - r/2| = {d_half:.1e} (<= 1e-10)"
        ),
    ))
}

fn ex1() -> Outcome {
    let records = run_experiment(&desk(Case::Ex1))?;
    let h1 = fit_records(&records, "h", "err_h1", |_| true)?.slope;
    let l2 = fit_records(&records, "h", "err_l2", |_| true)?.slope;
    let res = run_experiment(&ExperimentConfig { n_list: vec![64, 128], ..desk(Case::Ex1) })?;
    let factor = res[0].err_h1.unwrap_or(f64::NAN) / res[1].err_h1.unwrap_or(f64::NAN);
    Ok((
        within(h1, 0.8, 1.2) && within(l2, 1.7, 2.3) && factor < 1.6,
        format!(
            "H1 slope {h1:.3} in [0.8, 1.2], L2 slope {l2:.3} in [1.7, 2.3]; N 64 -> 128 H1 factor {factor:.3} (< 1.6)"
        ),
    ))
}

fn ex2() -> Outcome {
    let config = ExperimentConfig { hfine: Some(FINE_REFERENCE), ..desk(Case::Ex2) };
    let records = run_experiment(&config)?;
    let h1 = fit_records(&records, "h", "err_h1", coarser_than_two_eps)?.slope;
    let l2 = fit_records(&records, "h", "err_l2", coarser_than_two_eps)?.slope;
    let last = records.last().expect("non-empty N list");
    let (ms, hom) = (last.err_l2.unwrap_or(f64::NAN), last.err_l2_homog.unwrap_or(f64::NAN));
    let column = |f: fn(&ConvergenceRecord) -> Option<f64>| {
        records.iter().filter_map(f).map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")
    };
    let setup = case_setup(Case::Ex2, DESK_EPS, config.seed)?;
    let opts = CgOptions { tol: config.cg_tol, mode: config.mode, ..CgOptions::default() };
    let cache = config.cache.as_deref();
    let reference = solve_reference(&setup.profile, &setup.data, &setup.label, FINE_REFERENCE, &opts, cache)?;
    let check =
        reference_error_estimate(&setup.profile, &setup.data, &setup.label, &reference, FINE_REFERENCE, &opts, cache)?;
    Ok((
        within(h1, 0.8, 1.2) && within(l2, 1.7, 2.3) && ms < hom,
        format!(
            "h > 2 eps: H1 slope {h1:.3} in [0.8, 1.2], L2 slope {l2:.3} in [1.7, 2.3]; MsFEM H1 [{}], \
             reference H1 error estimate {:.2e}; homogenized L2 [{}]; smallest h: MsFEM L2 {ms:.2e} < homogenized {hom:.2e}",
            column(|r| r.err_h1),
            check.h1,
            column(|r| r.err_l2_homog),
        ),
    ))
}

fn ex3_ex4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for case in [Case::Ex3, Case::Ex4] {
        let records = run_experiment(&desk(case))?;
        let h1 = fit_records(&records, "h", "err_h1", coarser_than_two_eps)?.slope;
        pass &= within(h1, 0.8, 1.2);
        parts.push(format!("{case} H1 slope {h1:.3}"));
    }
    Ok((pass, format!("h > 2 eps: {} in [0.8, 1.2]", parts.join(", "))))
}

fn condition() -> Outcome {
    let records = run_experiment(&desk(Case::Cond))?;
    let slope = fit_records(&records, "h", "cond2", |_| true)?.slope;
    let conds: Vec<String> = records.iter().filter_map(|r| r.cond2).map(|c| format!("{c:.1}")).collect();
    Ok((within(slope, -2.3, -1.7), format!("cond2 [{}], slope {slope:.3} in [-2.3, -1.7]", conds.join(", "))))
}

fn homog_rates() -> Outcome {
    let config = ExperimentConfig {
        hfine: Some(FINE_REFERENCE),
        cache: Some(cache_dir()),
        timings: false,
        ..ExperimentConfig::for_case(Case::HomogRates)
    };
    let rates = run_homog_rates(&config)?;
    let (z, f) = (rates.zeroth.slope, rates.first.slope);
    let (d, tr) = (rates.decay_rate, rates.truncation_change);
    Ok((
        within(z, 0.35, 0.65) && within(f, 0.7, 1.3) && d > 0.0 && tr <= 1e-6,
        format!(
            "eps {:?}, hfine 1/1280: zeroth-order slope {z:.3} in [0.35, 0.65], first-order slope {f:.3} in [0.7, 1.3], \
             decay rate {d:.3} (> 0), truncation change {tr:.1e} (<= 1e-6)",
            config.eps_list
        ),
    ))
}

fn determinism() -> Outcome {
    let base = ExperimentConfig {
        epsilon: 1.0 / 16.0,
        n_list: vec![3, 6, 12],
        timings: false,
        mode: ExecMode::Serial,
        ..ExperimentConfig::for_case(Case::Ex2)
    };
    let first = to_csv(&base, &run_experiment(&base)?)?;
    let again = to_csv(&base, &run_experiment(&base)?)?;
    let par = run_experiment(&ExperimentConfig { mode: ExecMode::Parallel, ..base.clone() })?;
    let ser = run_experiment(&base)?;
    let mut worst = 0.0f64;
    for (a, b) in ser.iter().zip(&par) {
        for col in ["err_l2", "err_h1", "err_l2_homog", "err_h1_homog"] {
            if let (Some(x), Some(y)) = (a.get(col), b.get(col)) {
                worst = worst.max((x - y).abs() / x.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    let limit = 10.0 * base.cg_tol;
    Ok((
        first == again && worst <= limit,
        format!(
            "serial repeat bit-identical {}, parallel vs serial relative diff {worst:.1e} (<= {limit:.0e})",
            first == again
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("degeneration to P1", degeneration),
        ("basis invariants", basis_invariants),
        ("effective data", effective_data),
        ("EX1 convergence and resonance", ex1),
        ("EX2 convergence and homogenized comparison", ex2),
        ("EX3/EX4 convergence", ex3_ex4),
        ("condition-number scaling", condition),
        ("homogenization rates", homog_rates),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => o,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("{} {name}: {detail} [{:.0} s]", if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
