//! Randomized-benchmarking tomography on one to three qubits.
//!
//! The crate simulates randomized-benchmarking experiments with noisy
//! Clifford twirls and SPAM errors, turns the resulting decays into average
//! fidelities with Hoeffding-style confidence guarantees, reconstructs the
//! unital part of a map from its fidelities to a spanning set of Cliffords,
//! and bounds fidelities to non-Clifford unitaries through Clifford+T
//! decompositions.

pub mod bounds;
pub mod channel;
pub mod clifford;
pub mod error;
pub mod io;
pub mod linalg;
pub mod pauli;
pub mod rb;
pub mod tomography;

pub use error::{Error, Result};
