//! Vanishing-viscosity laboratory for the isentropic gas rarefaction attached to vacuum.
//!
//! - [`gasdyn`]: gamma-law gas, Riemann invariants, the exact vacuum fan and its cut-off.
//! - [`smoothwave`]: Burgers-smoothed approximate wave, epsilon schedule, estimate verifiers.
//! - [`nssolver`]: explicit finite-volume solver for the viscous isentropic system.
//! - [`limitlab`]: epsilon sweeps, perturbation energies and rate fitting.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod gasdyn;
pub mod limitlab;
pub mod nssolver;
pub mod quad;
pub mod smoothwave;

pub use error::{Error, Result};
pub use exec::Exec;
