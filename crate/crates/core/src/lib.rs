//! Reaction-diffusion systems on two compartments coupled through a
//! transmitting interface: geometry and meshing, kinetics, a finite-volume
//! solver, entropy diagnostics and renormalised-solution residuals.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod geometry;
pub mod kinetics;
pub mod profile;
pub mod renormalisation;
pub mod scenarios;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
pub use field::StateField;
