//! Symbolic simulation of multi-photon OAM experiments and a randomized
//! search for setups producing high-dimensional entanglement or cyclic
//! single-photon transformations.

pub mod cycle;
pub mod detect;
pub mod dsl;
pub mod elements;
pub mod manifest;
pub mod error;
pub mod mode;
pub mod reproduce;
pub mod search;
pub mod setup;
pub mod spdc;
pub mod srv;
pub mod state;

pub use elements::{BsConvention, Simulator};
pub use error::{Error, ParseError, Result};
pub use mode::{path, ModeLabel, PathId, Polarization};
pub use setup::{Element, ExperimentConfig};
pub use state::{PhotonTerm, QuantumState};
