//! Pseudospectral solver for the convective Brinkman-Forchheimer equations on
//! the 3-torus, with a certificate engine for robustness of regularity.

pub mod certificates;
pub mod checkpoint;
pub mod error;
pub mod fields;
pub mod harness;
pub mod integrator;
pub mod operators;
pub mod random;

pub use error::{CbfError, Result};
pub use fields::{Grid, PhysicalField, SpectralField};
