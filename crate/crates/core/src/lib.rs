//! Lifting level-2 Maass cusp forms to Maass forms over the Hurwitz order,
//! together with Hecke operators and local spectral data.

pub mod adjoint;
pub mod coeff;
pub mod error;
pub mod hecke;
pub mod lift;
pub mod maass;
pub mod quaternion;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
