//! Characterization of two-qubit interaction Hamiltonians from
//! squared-concurrence measurement records.
//!
//! The library simulates the measurement protocol against a hidden
//! fully-nonlocal Hamiltonian, recovers the canonical interaction
//! coefficients and local frame from the spectrum of the record, and
//! reduces the remaining discrete ambiguity with targeted concurrence
//! measurements until a unique Hamiltonian (and its spin-orbit
//! parameters) remains.

pub mod error;
pub mod expsim;
pub mod model;
pub mod qcore;
pub mod spectral;

pub use error::{Error, Result};
