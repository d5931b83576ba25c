//! Quantum amplitude-amplification eigensolver on a dense statevector
//! simulator.
//!
//! Each round prepares `|+>⊗|alpha(theta)>`, applies
//! `T = R U R U†` (a Householder reflection about the trial state around a
//! controlled short-time evolution), measures the ancilla, and re-encodes
//! the amplified system state into the ansatz by minimizing a trace-distance
//! objective. A matched energy-gradient baseline lives in [`vqe`].

pub mod amplifier;
pub mod driver;
pub mod ansatz;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod learner;
pub mod parallel;
pub mod simulator;
pub mod vqe;

pub use error::{QaaeError, Result};
