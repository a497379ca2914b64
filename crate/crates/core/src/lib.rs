//! Floquet analysis of the quantum Rabi model with a periodically modulated coupling.

pub mod cli;
pub mod config;
pub mod error;
pub mod floquet;
pub mod hamiltonian;
pub mod linalg;
pub mod observables;
pub mod operators;
pub mod output;
pub mod selfcheck;
pub mod special;
pub mod sweeps;

pub use error::{Error, Result};

/// Crate version, echoed in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
