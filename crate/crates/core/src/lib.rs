//! Planar ion Coulomb crystals in Penning traps: equilibria at fixed canonical angular
//! momentum, symplectic normal modes, modulated-carrier two-qubit gate fidelities and the
//! design of state-dependent dipole-force pulse sequences.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beams;
pub mod bench;
pub mod constants;
pub mod crystal;
pub mod error;
pub mod gate;
pub mod modes;
pub mod scales;

pub use error::{Error, Result};
