//! Simulator for a single-photon Fredkin gate built from polarization and OAM optics.

pub mod circuit;
pub mod elements;
pub mod error;
pub mod hilbert;

pub use error::{Error, Result};
pub mod ghz;
pub mod measurement;
pub mod output;
pub mod runner;
pub mod sampling;
pub mod tomography;
