//! Pseudo-spectral laboratory for least-energy steady vortices of the 2D
//! incompressible Euler equation on the square (0, π)².
//!
//! The crate computes ground states of the Lane-Emden equation −Δu = |u|^{p−1}u
//! by two independent variational routes, audits the conserved quantities of
//! the vorticity equation under pseudo-spectral time integration, and runs
//! finite-horizon orbital-stability experiments around the steady vortices
//! ±ω̃ = ∓Δu with full drift reporting.

// `!(x > 0.0)` is used deliberately throughout: it rejects NaN along with
// the out-of-range values, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod euler;
pub mod field_io;
pub mod grid;
pub mod lane_emden;
pub mod limits;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use grid::{Grid, ScalarField};
pub use spectral::SpectralField;
