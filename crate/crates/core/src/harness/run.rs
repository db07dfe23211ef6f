//! End-to-end experiment drivers.

use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::femcore::{self, CgOptions, CgStats, EigenOptions, ErrorNorms, Field, P1Evaluator, SparseSystem};
use crate::geometry::{build_coarse_mesh, build_reference_mesh, BoundaryProfile, EdgeTag, TriMesh};
use crate::harness::cases::{case_setup, example_cell};
use crate::harness::config::{Case, ExperimentConfig};
use crate::harness::fit::{fit_records, SlopeFit};
use crate::harness::record::{write_csv, ConvergenceRecord};
use crate::homogenization::{
    effective_flux, first_order_field, solve_homogenized, solve_strip, BoundaryLayer, FirstOrderForm, HomogenizedCase,
    StripData, StripEvaluator, StripProblem, StripSolution,
};
use crate::msfem::{self, cache::sha256_hex, ModelData, MsBasis, MsfemEvaluator};

/// Plain P1 solution on the fine boundary-conforming mesh.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub mesh: TriMesh,
    pub u: Field,
    /// `None` when loaded from the cache.
    pub stats: Option<CgStats>,
}

fn check_residual(stats: &CgStats, tol: f64, what: &str) -> Result<()> {
    if stats.residual > tol {
        return Err(Error::Convergence { iterations: stats.iterations, residual: stats.residual })
            .map_err(|e| e.at_stage(what, None));
    }
    Ok(())
}

/// P1 system of the full rough-domain problem on `mesh`.
pub fn assemble_p1(mesh: &TriMesh, data: &ModelData, mode: ExecMode) -> Result<SparseSystem> {
    let matrix = femcore::assemble_stiffness(mesh, mode)?;
    let mut rhs = femcore::assemble_load(mesh, data.f.as_ref(), mode);
    let g = femcore::assemble_edge_flux(mesh, EdgeTag::Rough, data.flux.g.as_ref())?;
    rhs.iter_mut().zip(&g).for_each(|(r, g)| *r += g);
    Ok(SparseSystem { matrix, rhs })
}

pub fn solve_p1(mesh: &TriMesh, data: &ModelData, opts: &CgOptions) -> Result<(Field, CgStats)> {
    let system = assemble_p1(mesh, data, opts.mode)?;
    let constraints: Vec<(usize, f64)> =
        mesh.tagged_vertices(EdgeTag::Dirichlet).into_iter().map(|v| (v, (data.dirichlet)(mesh.vertices[v]))).collect();
    let reduced = femcore::impose_dirichlet(&system, &constraints)?;
    let (u, stats) = femcore::solve_cg(&reduced, opts)?;
    Ok((Field::new(u), stats))
}

/// Reference solution at mesh size `hfine`, reusing `cache` when given.
pub fn solve_reference(
    profile: &BoundaryProfile,
    data: &ModelData,
    label: &str,
    hfine: f64,
    opts: &CgOptions,
    cache: Option<&Path>,
) -> Result<ReferenceSolution> {
    let mesh = build_reference_mesh(profile, hfine)?;
    let key = sha256_hex(&format!(
        "ref-v1|{}|{label}|{:016x}|{:016x}",
        profile.cache_key(),
        hfine.to_bits(),
        opts.tol.to_bits()
    ));
    let path = cache.map(|d| d.join(format!("ref-{key}.field")));
    if let Some(path) = &path {
        if let Ok(text) = fs::read_to_string(path) {
            let u = Field::from_text(&text)?;
            if u.check(&mesh).is_ok() {
                log::info!("reference solution loaded from {}", path.display());
                return Ok(ReferenceSolution { mesh, u, stats: None });
            }
        }
    }
    let (u, stats) = solve_p1(&mesh, data, opts)?;
    log::info!("reference solve: {} vertices, {} CG iterations", mesh.n_vertices(), stats.iterations);
    check_residual(&stats, opts.tol, "reference solve")?;
    if let Some(path) = &path {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, u.to_text()).map_err(|e| Error::io(path, e))?;
    }
    Ok(ReferenceSolution { mesh, u, stats: Some(stats) })
}

/// Two-level check of a reference solution: solves again at `2 hfine` and
/// returns the norms of the difference. For P1 the H1 difference estimates
/// the H1 error of the finer solution, a third of the L2 difference its L2
/// error.
pub fn reference_error_estimate(
    profile: &BoundaryProfile,
    data: &ModelData,
    label: &str,
    reference: &ReferenceSolution,
    hfine: f64,
    opts: &CgOptions,
    cache: Option<&Path>,
) -> Result<ErrorNorms> {
    let coarser = solve_reference(profile, data, label, 2.0 * hfine, opts, cache)?;
    let ev = P1Evaluator::new(&coarser.mesh, &coarser.u)?;
    let d = femcore::error_norms(&reference.mesh, &reference.u, &ev, opts.mode)?;
    log::info!("reference check at hfine = {hfine}: estimated error H1 {:.3e}, L2 {:.3e}", d.h1, d.l2 / 3.0);
    Ok(d)
}

/// Cell bases for one coarse mesh, through the cache when configured.
pub fn cell_bases(
    coarse: &crate::geometry::CoarseMesh,
    data: &ModelData,
    htilde: f64,
    mode: ExecMode,
    cache: Option<&Path>,
) -> Result<Vec<MsBasis>> {
    let key = msfem::basis_cache_key(&coarse.profile, coarse.n, htilde, &data.flux);
    if let Some(dir) = cache {
        if let Some(b) = msfem::load_bases(dir, &key, coarse)? {
            return Ok(b);
        }
    }
    let bases = msfem::solve_cell_bases(coarse, &data.flux, htilde, mode)?;
    if let Some(dir) = cache {
        msfem::save_bases(dir, &key, &bases)?;
    }
    Ok(bases)
}

fn secs(t: Instant, on: bool) -> Option<f64> {
    on.then(|| t.elapsed().as_secs_f64())
}

/// Runs an MsFEM convergence study (EX1–EX4) or the condition-number study
/// (COND) and writes the CSV when an output path is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ConvergenceRecord>> {
    config.validate()?;
    if config.case == Case::HomogRates {
        return Ok(run_homog_rates(config)?.records);
    }
    let eps = config.epsilon;
    let setup = case_setup(config.case, eps, config.seed)?;
    let mode = config.mode;
    let cache = config.cache.as_deref();
    let opts = CgOptions { tol: config.cg_tol, mode, ..Default::default() };
    let hfine = config.hfine_for(eps);
    let htilde = config.htilde_for(eps);

    let t = Instant::now();
    let reference = if config.case == Case::Cond {
        None
    } else {
        Some(
            solve_reference(&setup.profile, &setup.data, &setup.label, hfine, &opts, cache)
                .map_err(|e| e.at_stage("reference solve", None))?,
        )
    };
    let t_ref = secs(t, config.timings);
    if let (Some(r), true) = (&reference, config.reference_check) {
        reference_error_estimate(&setup.profile, &setup.data, &setup.label, r, hfine, &opts, cache)
            .map_err(|e| e.at_stage("reference check", None))?;
    }

    let homog_flux = match (&setup.g_periodic, config.case) {
        (Some(g), Case::Ex2) => Some(effective_flux(&example_cell(), g.as_ref()).flux),
        _ => None,
    };

    let mut records = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let stage = |s: &'static str| move |e: Error| e.at_stage(s, Some(n));
        let coarse = build_coarse_mesh(&setup.profile, n).map_err(stage("coarse mesh"))?;
        let t = Instant::now();
        let bases = cell_bases(&coarse, &setup.data, htilde, mode, cache).map_err(stage("cell problems"))?;
        let t_cells = secs(t, config.timings);
        let t = Instant::now();
        let sol = msfem::solve_msfem(&coarse, &bases, &setup.data, &opts).map_err(stage("msfem solve"))?;
        check_residual(&sol.stats, config.cg_tol, "msfem solve").map_err(stage("msfem solve"))?;
        let t_solve = secs(t, config.timings);
        let mut rec = ConvergenceRecord {
            case: config.case.to_string(),
            eps,
            h: Some(coarse.h()),
            htilde: Some(htilde),
            cells: Some(bases.len()),
            t_ref_s: t_ref,
            t_cells_s: t_cells,
            t_solve_s: t_solve,
            ..Default::default()
        };
        if config.case == Case::Cond {
            let est = femcore::condition_number_2norm(
                &sol.reduced.matrix,
                &EigenOptions { tol: config.cond_tol, mode, ..Default::default() },
            )
            .map_err(stage("condition number"))?;
            rec.cond2 = Some(est.cond);
        }
        if let Some(reference) = &reference {
            rec.hfine = Some(hfine);
            let ev = MsfemEvaluator::new(&coarse, &sol.coeffs, &bases)?;
            let e = femcore::error_norms(&reference.mesh, &reference.u, &ev, mode).map_err(stage("error norms"))?;
            if ev.fallback_count() > 0 {
                log::debug!("N = {n}: {} evaluations outside the cell meshes", ev.fallback_count());
            }
            rec.err_l2 = Some(e.l2);
            rec.err_h1 = Some(e.h1);
            if let Some(flux) = homog_flux {
                let case =
                    HomogenizedCase { f: setup.data.f.clone(), flux, dirichlet: setup.data.dirichlet.clone(), n };
                let hom = solve_homogenized(&case, &opts).map_err(stage("homogenized solve"))?;
                let ev = P1Evaluator::new(&hom.mesh, &hom.u)?;
                let e = femcore::error_norms(&reference.mesh, &reference.u, &ev, mode)
                    .map_err(stage("homogenized error"))?;
                log_containment(&reference.mesh, &ev, eps);
                rec.err_l2_homog = Some(e.l2);
                rec.err_h1_homog = Some(e.h1);
            }
        }
        log::info!("{} N = {n}: {:?}", config.case, rec);
        records.push(rec);
    }
    if let Some(path) = &config.output {
        write_csv(path, config, &records)?;
    }
    Ok(records)
}

/// Records whether the rough domain lies inside the unit square; points
/// outside are compared against the linear extension of the homogenized field.
fn log_containment(mesh: &TriMesh, hom: &P1Evaluator, eps: f64) {
    let contained = mesh.vertices.iter().all(|p| p[1] >= 0.0);
    log::info!(
        "eps = {eps}: rough domain contained in the homogenized domain: {contained}; {} extended evaluations",
        hom.extended_hits()
    );
}

/// Outcome of the homogenization-rate study.
#[derive(Debug, Clone)]
pub struct HomogRates {
    /// `err_h1_homog` holds `|grad(u_ref - u0)|`, `err_h1` holds `|grad(u_ref - u1)|`.
    pub records: Vec<ConvergenceRecord>,
    pub zeroth: SlopeFit,
    pub first: SlopeFit,
    /// Fitted exponential decay rate of the `B1` strip field.
    pub decay_rate: f64,
    /// Largest change of the `B1` field below height 2 when `L` doubles.
    pub truncation_change: f64,
}

fn strip(config: &ExperimentConfig, data: StripData, height: f64) -> Result<StripSolution> {
    let mut p = StripProblem::new(example_cell(), data);
    p.height = height;
    p.cols = config.strip_cols;
    p.mode = config.mode;
    solve_strip(&p)
}

/// Zeroth- and first-order homogenization errors against fine reference
/// solutions of the EX1 problem for each epsilon in `eps_list`.
pub fn run_homog_rates(config: &ExperimentConfig) -> Result<HomogRates> {
    let mode = config.mode;
    let opts = CgOptions { tol: config.cg_tol, mode, ..Default::default() };
    let stage = |s: &'static str| move |e: Error| e.at_stage(s, None);
    // g = 0, so beta0 vanishes identically
    let b1 = strip(config, StripData::B1, config.strip_height).map_err(stage("strip B1"))?;
    let b2 = strip(config, StripData::B2, config.strip_height).map_err(stage("strip B2"))?;
    let b1_long = strip(config, StripData::B1, 2.0 * config.strip_height).map_err(stage("strip B1 doubled"))?;
    let decay_rate = b1.decay_rate(&[1.0, 2.0, 3.0])?;
    let truncation_change = b1.max_difference_below(&b1_long, 2.0)?;

    let mut records = Vec::new();
    for &eps in &config.eps_list {
        let setup = case_setup(Case::HomogRates, eps, config.seed)?;
        let hfine = config.hfine_for(eps);
        let t = Instant::now();
        let reference =
            solve_reference(&setup.profile, &setup.data, &setup.label, hfine, &opts, config.cache.as_deref())
                .map_err(stage("reference solve"))?;
        let t_ref = secs(t, config.timings);
        if config.reference_check {
            reference_error_estimate(
                &setup.profile,
                &setup.data,
                &setup.label,
                &reference,
                hfine,
                &opts,
                config.cache.as_deref(),
            )
            .map_err(stage("reference check"))?;
        }
        let t = Instant::now();
        let n0 = (1.0 / hfine).round() as usize;
        let case =
            HomogenizedCase { f: setup.data.f.clone(), flux: 0.0, dirichlet: setup.data.dirichlet.clone(), n: n0 };
        let hom = solve_homogenized(&case, &opts).map_err(stage("homogenized solve"))?;
        let u0 = P1Evaluator::new(&hom.mesh, &hom.u)?;
        let zeroth = femcore::error_norms(&reference.mesh, &reference.u, &u0, mode)?;
        log_containment(&reference.mesh, &u0, eps);
        let layer = BoundaryLayer {
            beta0: None,
            beta1: Some(StripEvaluator::new(&b1)),
            beta2: Some(StripEvaluator::new(&b2)),
            form: FirstOrderForm::Standard,
        };
        let u1 = first_order_field(&u0, layer, eps);
        let first = femcore::error_norms(&reference.mesh, &reference.u, &u1, mode)?;
        let rec = ConvergenceRecord {
            case: Case::HomogRates.to_string(),
            eps,
            hfine: Some(hfine),
            err_l2: Some(first.l2),
            err_h1: Some(first.h1),
            err_l2_homog: Some(zeroth.l2),
            err_h1_homog: Some(zeroth.h1),
            t_ref_s: t_ref,
            t_solve_s: secs(t, config.timings),
            ..Default::default()
        };
        log::info!("HOMOG_RATES eps = {eps}: {rec:?}");
        records.push(rec);
    }
    let zeroth = fit_records(&records, "eps", "err_h1_homog", |_| true)?;
    let first = fit_records(&records, "eps", "err_h1", |_| true)?;
    if let Some(path) = &config.output {
        write_csv(path, config, &records)?;
    }
    Ok(HomogRates { records, zeroth, first, decay_rate, truncation_change })
}
