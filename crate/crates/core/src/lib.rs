//! Parseval frames and orthonormal bases for bandlimited subspaces of
//! step-two nilpotent Lie groups, built from quasi-lattices and per-fiber
//! Gabor systems.
//!
//! The pipeline runs algebra → spectral data → lattice design → window
//! synthesis → independent verification; the `nilframe` binary drives it
//! from a JSON config.

pub mod algebra;
pub mod cli;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod lattice;
pub mod rational;
pub mod spectral;
pub mod verify;
pub mod window;

pub use error::{Error, Result};
