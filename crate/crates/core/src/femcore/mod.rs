//! P1 assembly, constraints, Krylov solves, eigenvalue estimates and error norms.

pub mod assembly;
pub mod cg;
pub mod condition;
pub mod field;
pub mod norms;
pub mod sparse;
pub mod system;

pub use assembly::{
    assemble_edge_flux, assemble_load, assemble_stiffness, assemble_stiffness_mapped, edge_flux, element_load,
    element_stiffness, fold_to_dofs,
};
pub use cg::{pcg, solve_cg, CgOptions, CgStats};
pub use condition::{condition_number_2norm, ConditionEstimate, EigenOptions};
pub use field::Field;
pub use norms::{error_norms, ErrorNorms, Evaluator, P1Evaluator};
pub use sparse::CsrMatrix;
pub use system::{impose_dirichlet, ConstrainedSystem, SparseSystem};
