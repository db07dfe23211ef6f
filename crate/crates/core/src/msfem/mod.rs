//! Multiscale finite element method on the rough-boundary domain.

pub mod assemble;
pub mod basis;
pub mod cache;
pub mod evaluate;
pub mod flux;

pub use assemble::{assemble_msfem, cell_load, dirichlet_constraints, solve_msfem, ModelData, MsfemSolution};
pub use basis::{solve_cell_bases, solve_cell_basis, MsBasis, CELL_CG_TOL};
pub use cache::{basis_cache_key, load_bases, save_bases};
pub use evaluate::MsfemEvaluator;
pub use flux::{edge_flux_theta, CellFlux, FluxBranch, FluxMode, FluxSpec, ScalarFn};
