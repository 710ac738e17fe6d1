//! Simulation lab for the prefix/tree family of `n`-qubit states.

pub mod analysis;
pub mod error;
pub mod family;
pub mod harness;
pub mod oracle;
pub mod pauli;
pub mod protocols;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use family::{CoefficientProfile, FamilyInstance, Physicality};
pub use pauli::{BasisString, Outcome, PauliAxis};
pub use sampler::ShotStream;
