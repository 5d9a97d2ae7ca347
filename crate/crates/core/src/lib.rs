//! Vacuum kinetic energy density of a massless scalar field in 1+1
//! dimensions with a square barrier background, the spatial quantum
//! inequality bound, ramp perturbation theory, post-quench pulses and a
//! lattice cross-check.

mod dd;
pub mod density;
pub mod error;
pub mod io;
pub mod lattice;
pub mod modes;
pub mod quadrature;
pub mod pulses;
pub mod ramp;
pub mod sampling;
pub mod well;

pub use error::{Error, Result};
pub use quadrature::QuadratureSpec;
pub use well::{GreensDiagonal, WellConfig};
