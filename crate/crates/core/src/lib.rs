//! Multiscale finite elements for the Laplace equation on domains with a
//! rough, oscillating bottom boundary carrying a Neumann flux.
//!
//! * [`geometry`] — boundary profiles and boundary-conforming meshes.
//! * [`femcore`] — P1 assembly, conjugate gradients, error norms.
//! * [`msfem`] — multiscale basis on rough-edge elements and the global solve.
//! * [`homogenization`] — effective boundary data, strip problems, first-order approximant.
//! * [`harness`] — convergence experiments, slope fits and CSV output.

// `!(x > 0.0)` checks reject NaN on purpose; index loops over small fixed
// arrays read better than iterator chains here.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod femcore;
pub mod geometry;
pub mod harness;
pub mod homogenization;
pub mod msfem;
pub mod quadrature;

pub use error::{Error, Result};
pub use exec::ExecMode;
