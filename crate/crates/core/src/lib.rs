//! Chaotic decompositions for pure-jump Lévy noises of Meixner type.
//!
//! The crate builds the three constructions side by side on a discretized
//! base space: multiple stochastic integrals against orthogonalized Teugels
//! measures, Wick powers of the noise, and the Jacobi-field operators, and
//! checks that they agree pathwise and in law.

pub mod chaos;
pub mod config;
pub mod error;
pub mod exact;
pub mod jacobi;
pub mod jumps;
pub mod lattice;
pub mod levy_models;
pub mod multiindex;
pub mod orthopoly;
pub mod quad;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
