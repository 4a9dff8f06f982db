//! Simulation of the power-query quantum algorithm for the smallest
//! eigenvalue of `-u'' + q u` on `(0, 1)` with Dirichlet boundary
//! conditions, plus the symbolic frequency analysis used to audit the
//! matching query lower bound.

pub mod audit;
pub mod discretization;
pub mod eigen;
pub mod error;
pub mod format;
pub mod frequency;
pub mod phase_estimation;
pub mod potential;
pub mod quantum;

pub use error::{Error, Result};
pub use potential::PotentialSpec;
