//! Effective boundary data, homogenized problem, boundary-layer strips and
//! the first-order approximant.

pub mod effective;
pub mod first_order;
pub mod homogenized;
pub mod strip;

pub use effective::{effective_flux, EffectiveFlux};
pub use first_order::{first_order_field, BoundaryLayer, FirstOrderField, FirstOrderForm};
pub use homogenized::{solve_homogenized, HomogenizedCase, HomogenizedSolution};
pub use strip::{solve_strip, PeriodicFn, StripData, StripEvaluator, StripProblem, StripSolution, STRIP_CG_TOL};
