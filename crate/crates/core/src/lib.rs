//! Simulation and training of nondeterministic linear-optical state
//! preparation with biased photon-number-resolving detectors.

pub mod detector;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod gate;
pub mod interferometer;
pub mod learning;

pub use error::{Error, Result};
