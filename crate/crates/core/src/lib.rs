//! Noise spectra and photon statistics of a driven single-mode cavity
//! filled with a two-level χ⁽³⁾ medium.

pub mod cli;
pub mod error;
pub mod invfree;
pub mod linearized;
pub mod params;
pub mod sde;
pub mod semiclassical;

pub use error::{Error, Result};
pub use params::{MediumParams, Model, ModelInputs, Susceptibilities};
