//! Benchmark Hamiltonian systems.

pub mod argon;
pub mod kepler;
pub mod sho;

pub use argon::{make_argon7, ArgonConfig, FSEC};
pub use kepler::{kepler_exact, make_kepler, KeplerConfig};
pub use sho::{make_sho, make_sho_from};
