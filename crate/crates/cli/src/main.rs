//! Command-line driver for the rough-boundary MsFEM experiments.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use roughfem::femcore::CgOptions;
use roughfem::geometry::{build_coarse_mesh, build_reference_mesh, io::write_mesh};
use roughfem::harness::{self, case_setup, example_cell, Case, ExperimentConfig};
use roughfem::homogenization::{
    effective_flux, solve_homogenized, solve_strip, HomogenizedCase, StripData, StripProblem,
};
use roughfem::msfem;
use roughfem::ExecMode;

#[derive(Parser, Debug)]
#[command(name = "roughfem", version, about = "Multiscale FEM for rough-boundary Laplace problems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment case: EX1, EX2, EX3, EX4, COND, HOMOG_RATES.
    #[arg(long, global = true)]
    case: Option<String>,
    /// Roughness length epsilon (accepts `1/64`).
    #[arg(long, global = true, value_parser = parse_number)]
    eps: Option<f64>,
    /// Coarse divisions, comma separated.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Subgrid size of the cell meshes (default eps/20).
    #[arg(long, global = true, value_parser = parse_number)]
    htilde: Option<f64>,
    /// Reference mesh size (default eps/10).
    #[arg(long, global = true, value_parser = parse_number)]
    hfine: Option<f64>,
    /// Seed of the random profiles (EX3, EX4, COND).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CG relative residual tolerance.
    #[arg(long, global = true, value_parser = parse_number)]
    tol: Option<f64>,
    /// Output file (CSV for studies, text otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory for reference solutions and cell bases.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Strictly serial, bit-reproducible execution.
    #[arg(long, global = true)]
    serial: bool,
    /// Leave the timing columns empty.
    #[arg(long, global = true)]
    no_timings: bool,
    /// Start from the paper-scale profile (eps 1/128, hfine 1e-3) instead of the desk-scale defaults.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Also solve the reference at 2 hfine and log the estimated reference error.
    #[arg(long, global = true)]
    reference_check: bool,
    /// JSON experiment config; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a coarse or reference mesh in the plain-text mesh format.
    Mesh {
        #[arg(long, value_enum, default_value_t = MeshKind::Coarse)]
        kind: MeshKind,
    },
    /// Solve the fine-mesh P1 reference problem.
    SolveRef,
    /// Solve the MsFEM problem on the first N of the list.
    SolveMsfem,
    /// Solve the homogenized problem on the unit square.
    SolveHomog,
    /// Solve a boundary-layer strip problem for the example cell.
    Strip {
        #[arg(long, value_enum, default_value_t = StripArg::B1)]
        data: StripArg,
        /// Truncation height L.
        #[arg(long, default_value_t = 5.0)]
        height: f64,
        #[arg(long, default_value_t = 64)]
        cols: usize,
    },
    /// MsFEM convergence study (EX1-EX4).
    Convergence,
    /// Condition-number study.
    Condition,
    /// Zeroth- and first-order homogenization rates.
    HomogRates,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MeshKind {
    Coarse,
    Reference,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StripArg {
    B0,
    B1,
    B2,
    B0Tilde,
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
            Ok(a / b)
        }
        None => s.trim().parse().map_err(|_| format!("bad number `{s}`")),
    }
}

fn build_config(c: &Common, default_case: Option<Case>) -> Result<ExperimentConfig> {
    if c.paper_scale && c.config.is_some() {
        anyhow::bail!("--paper-scale and --config are mutually exclusive");
    }
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => {
            let case = match &c.case {
                Some(case) => case.parse()?,
                None => default_case.unwrap_or(Case::Ex1),
            };
            if c.paper_scale {
                ExperimentConfig::paper_scale(case)
            } else {
                ExperimentConfig::for_case(case)
            }
        }
    };

    if let Some(case) = &c.case {
        cfg.case = case.parse()?;
    } else if let (Some(d), None) = (default_case, &c.config) {
        cfg.case = d;
    }
    if let Some(e) = c.eps {
        cfg.epsilon = e;
    }
    if let Some(n) = &c.n {
        cfg.n_list = n.clone();
    }
    cfg.htilde = c.htilde.or(cfg.htilde);
    cfg.hfine = c.hfine.or(cfg.hfine);
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.tol {
        cfg.cg_tol = t;
    }
    if c.out.is_some() {
        cfg.output = c.out.clone();
    }
    if c.cache.is_some() {
        cfg.cache = c.cache.clone();
    }
    if c.serial {
        cfg.mode = ExecMode::Serial;
    }
    if c.no_timings {
        cfg.timings = false;
    }
    if c.reference_check {
        cfg.reference_check = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_records(records: &[harness::ConvergenceRecord], cfg: &ExperimentConfig) -> Result<()> {
    if cfg.output.is_none() {
        print!("{}", harness::to_csv(cfg, records)?);
    } else {
        for r in records {
            println!(
                "{} eps={} h={:?} err_l2={:?} err_h1={:?} cond2={:?}",
                r.case, r.eps, r.h, r.err_l2, r.err_h1, r.cond2
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match cli.command {
        Command::Mesh { kind } => {
            let cfg = build_config(c, None)?;
            let setup = case_setup(cfg.case, cfg.epsilon, cfg.seed)?;
            let mesh = match kind {
                MeshKind::Coarse => build_coarse_mesh(&setup.profile, cfg.n_list[0])?.mesh,
                MeshKind::Reference => build_reference_mesh(&setup.profile, cfg.hfine_for(cfg.epsilon))?,
            };
            emit(c.out.as_deref(), &write_mesh(&mesh))
        }
        Command::SolveRef => {
            let cfg = build_config(c, None)?;
            let setup = case_setup(cfg.case, cfg.epsilon, cfg.seed)?;
            let opts = CgOptions { tol: cfg.cg_tol, mode: cfg.mode, ..Default::default() };
            let r = harness::solve_reference(
                &setup.profile,
                &setup.data,
                &setup.label,
                cfg.hfine_for(cfg.epsilon),
                &opts,
                cfg.cache.as_deref(),
            )?;
            eprintln!("reference: {} vertices, {:?}", r.mesh.n_vertices(), r.stats);
            emit(c.out.as_deref(), &r.u.to_text())
        }
        Command::SolveMsfem => {
            let cfg = build_config(c, None)?;
            let setup = case_setup(cfg.case, cfg.epsilon, cfg.seed)?;
            let n = cfg.n_list[0];
            let coarse = build_coarse_mesh(&setup.profile, n)?;
            let opts = CgOptions { tol: cfg.cg_tol, mode: cfg.mode, ..Default::default() };
            let bases = msfem::solve_cell_bases(&coarse, &setup.data.flux, cfg.htilde_for(cfg.epsilon), cfg.mode)?;
            let sol = msfem::solve_msfem(&coarse, &bases, &setup.data, &opts)?;
            eprintln!(
                "msfem N = {n}: {} cell problems, CG {:?}, Galerkin residual {:e}",
                bases.len(),
                sol.stats,
                sol.galerkin_residual()
            );
            emit(c.out.as_deref(), &sol.coeffs.to_text())
        }
        Command::SolveHomog => {
            let cfg = build_config(c, None)?;
            let setup = case_setup(cfg.case, cfg.epsilon, cfg.seed)?;
            let Some(g) = setup.g_periodic.clone() else {
                bail!("case {} has no periodic boundary; homogenized data are undefined", cfg.case);
            };
            let eff = effective_flux(&example_cell(), g.as_ref());
            eprintln!("r = {:.12}, <g> = {:.12}, r<g> = {:.12}", eff.r, eff.gbar, eff.flux);
            let case = HomogenizedCase {
                f: setup.data.f.clone(),
                flux: eff.flux,
                dirichlet: setup.data.dirichlet.clone(),
                n: cfg.n_list[0],
            };
            let opts = CgOptions { tol: cfg.cg_tol, mode: cfg.mode, ..Default::default() };
            let hom = solve_homogenized(&case, &opts)?;
            emit(c.out.as_deref(), &hom.u.to_text())
        }
        Command::Strip { data, height, cols } => {
            let cfg = build_config(c, None)?;
            let data = match data {
                StripArg::B0 => StripData::B0,
                StripArg::B1 => StripData::B1,
                StripArg::B2 => StripData::B2,
                StripArg::B0Tilde => StripData::B0Tilde,
            };
            let mut p = StripProblem::new(example_cell(), data);
            if data.needs_flux() {
                let setup = case_setup(Case::Ex2, cfg.epsilon, cfg.seed)?;
                p.g = setup.g_periodic;
            }
            p.height = height;
            p.cols = cols;
            p.mode = cfg.mode;
            let s = solve_strip(&p)?;
            // sample heights inside the strip, at most 1, 2, 3
            let step = (height / 4.0).min(1.0);
            let heights = [step, 2.0 * step, 3.0 * step];
            let maxima: Vec<f64> = heights.iter().map(|&h| s.cross_section_max(h)).collect();
            eprintln!("strip {data:?}: cross-section maxima at {heights:?} = {maxima:?}");
            match s.decay_rate(&heights) {
                Ok(d) => eprintln!("fitted decay rate {d:.4}"),
                Err(e) => eprintln!("no decay fit: {e}"),
            }
            emit(c.out.as_deref(), &s.beta.to_text())
        }
        Command::Convergence => {
            let cfg = build_config(c, Some(Case::Ex1))?;
            if matches!(cfg.case, Case::Cond | Case::HomogRates) {
                bail!("use the `condition` or `homog-rates` subcommand for case {}", cfg.case);
            }
            let records = harness::run_experiment(&cfg)?;
            print_records(&records, &cfg)?;
            for (y, name) in [("err_l2", "L2"), ("err_h1", "H1")] {
                match harness::fit_records(&records, "h", y, |r| r.h.unwrap_or(0.0) > 2.0 * cfg.epsilon) {
                    Ok(f) => eprintln!("{name} slope for h > 2 eps: {:.3}", f.slope),
                    Err(e) => eprintln!("{name} slope for h > 2 eps: unavailable ({e})"),
                }
            }
            Ok(())
        }
        Command::Condition => {
            let mut cfg = build_config(c, Some(Case::Cond))?;
            cfg.case = Case::Cond;
            let records = harness::run_experiment(&cfg)?;
            print_records(&records, &cfg)?;
            if let Ok(f) = harness::fit_records(&records, "h", "cond2", |_| true) {
                eprintln!("cond2 slope: {:.3}", f.slope);
            }
            Ok(())
        }
        Command::HomogRates => {
            let mut cfg = build_config(c, Some(Case::HomogRates))?;
            cfg.case = Case::HomogRates;
            let r = harness::run_homog_rates(&cfg)?;
            print_records(&r.records, &cfg)?;
            eprintln!(
                "zeroth-order slope {:.3}, first-order slope {:.3}, decay rate {:.3}, truncation change {:e}",
                r.zeroth.slope, r.first.slope, r.decay_rate, r.truncation_change
            );
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
