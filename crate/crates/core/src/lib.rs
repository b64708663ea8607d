//! Geometric time integrators for Hamiltonian systems.

// Validation uses `!(x > 0.0)` deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cgp;
pub mod error;
pub mod glm;
pub mod integrate;
pub mod irk;
pub mod model;
pub mod problems;
pub mod solver;
pub mod stepper;

pub use error::{Error, Result};
pub use model::{OdeProblem, RunRecord, StateVector};
pub use solver::{SolveMode, SolverConfig};
pub use stepper::Stepper;
