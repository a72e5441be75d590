//! Lattice laboratory for the self-dual U(1) Yang–Mills–Higgs energy on flat tori.
//!
//! The crate is organized by topic:
//!
//! - [`lattice`]: periodic cubical grids, twisted bundle sectors, discrete exterior calculus
//!   and gauge transformations.
//! - [`functional`]: the energy, its density, the gauge-invariant Jacobian and the
//!   Euler–Lagrange residual.
//! - [`hodge`]: spectral Poisson solves, Hodge decomposition and gauge fixing.
//! - [`flow`]: the gradient flow and its diagnostics (dissipation, discrepancy,
//!   backward heat kernel monotonicity, density ratios).
//! - [`vortex`]: radial vortex profiles and field synthesis.
//! - [`currents`]: integral cubical currents, flat norm, Jacobian currents and
//!   discrete families.

pub mod currents;
mod error;
mod fft;
pub mod flow;
pub mod functional;
pub mod hodge;
pub mod lattice;
pub mod reduce;
pub mod snapshot;
pub mod vortex;

pub use error::{Error, Result};
pub use functional::{EnergyReport, PairState};
pub use lattice::{BackgroundConnection, FormField, Gauge, Grid, ScalarField};

/// Crate version, stamped into experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
