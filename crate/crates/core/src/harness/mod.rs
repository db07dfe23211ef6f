//! Convergence experiments, slope fits and CSV output.

pub mod cases;
pub mod config;
pub mod fit;
pub mod record;
pub mod run;

pub use cases::{case_setup, example_cell, CaseSetup};
pub use config::{Case, ExperimentConfig};
pub use fit::{fit_records, fit_slope, SlopeFit};
pub use record::{from_csv, read_csv, to_csv, write_csv, ConvergenceRecord, COLUMNS};
pub use run::{
    reference_error_estimate, run_experiment, run_homog_rates, solve_p1, solve_reference, HomogRates, ReferenceSolution,
};
