//! Time-dependent physical (Eberly–Wódkiewicz) spectra for the Jaynes-Cummings
//! family of light-matter models, including f-deformed field operators.
//!
//! Units: ħ = 1 and every frequency is expressed in units of the atomic
//! transition frequency ω_a. Times are in units of 1/ω_a.
//!
//! The crate is organised bottom-up:
//!
//! - [`operators`]: deformation functions, truncated Fock ladders, tensor
//!   products and the parity operator.
//! - [`hamiltonian`]: the JC, deformed JC, Rabi, deformed Rabi and bare
//!   nonlinear-field Hamiltonians, dressed doublets and eigenvalue sweeps.
//! - [`dynamics`]: initial states, exact propagators and the two-time
//!   correlation engine.
//! - [`analytic`]: closed-form correlation functions.
//! - [`spectrum`]: the filtered spectrum, numerically and in closed form.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod operators;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
