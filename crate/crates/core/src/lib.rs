//! One-particle open quantum systems: states in block form, index traces,
//! correlations, zero-temperature GKSL dynamics and moment equations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod information;
pub mod integrate;
pub mod linalg;
pub mod moments;
pub mod one_particle;
pub mod oracle;
pub mod random;
pub mod reduction;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use one_particle::{OneParticlePureState, OneParticleState};
