//! Unambiguous discrimination of two nonorthogonal cavity-field states with
//! a three-level atom probe.
//!
//! The library models a field mode prepared in one of two known
//! nonorthogonal states, probed by a ladder atom that crosses the cavity
//! after a Ramsey rotation. Reading the atom out afterwards realizes a
//! three-outcome measurement on the field: two outcomes identify the
//! preparation with certainty and one is inconclusive. The crate builds the
//! joint dynamics, extracts the measurement operators, locates the coupling
//! ratio that minimizes the inconclusive rate, and cross-checks everything
//! against closed forms and seeded Monte Carlo sampling.
//!
//! Modules:
//! - [`linalg`]: dense complex vectors and matrices, Hermitian
//!   eigendecomposition, matrix exponential.
//! - [`dynamics`]: joint-space layout, protocol parameters, Hamiltonian and
//!   protocol unitary, closed-form columns.
//! - [`povm`]: measurement operators, outcome statistics, post-measurement
//!   states.
//! - [`optimize`]: coupling-ratio sweeps and the optimal operating point.
//! - [`montecarlo`]: seeded trial sampling and the never-wrong audit.
//! - [`tol`]: the numerical tolerances shared by library checks and tests.

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod optimize;
pub mod povm;
pub mod tol;

pub use error::{Error, Result};
