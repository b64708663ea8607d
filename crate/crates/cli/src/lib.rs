//! Experiment runner for the hamint integrators: single runs, step-size
//! sweeps and convergence studies written as CSV.

pub mod app;
pub mod config;
pub mod error;
pub mod experiment;
pub mod literal;
pub mod output;

pub use error::{CliError, CliResult};
