//! Radially symmetric convective Cahn-Hilliard laboratory.
//!
//! The phase field lives on the annulus `1 < r < M` in ℝⁿ (n = 2, 3) and is
//! transported by the divergence-free velocity `a r^{1-n}` while diffusing
//! with mobility `m̃ ε^α`. The crate provides the mesh and quadrature, the
//! potential and transition profile, the closed-form zero-mobility solution,
//! a time-stepping solver, the radial pressure reconstruction and the
//! energy/discrepancy diagnostics.

pub mod analytic;
mod banded;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod physics;
pub mod pressure;
mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{deriv_r, integrate, make_grid, radial_laplacian, BoundaryClosure, Field, RadialGrid};
pub use physics::{initial_condition, MobilityExponent, ModelParams, Potential, Profile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
