//! Numerical laboratory for radially symmetric quasilinear wave equations.
//!
//! The crate bundles the pieces needed to evolve small-data radial Cauchy
//! problems and to measure the geometric and analytic structure of their
//! solutions near the light cone:
//!
//! - [`frame`]: exact null-frame algebra on Minkowski space (decomposition
//!   and reconstruction of symmetric tensors, wave-operator reduction).
//! - [`grid`]: the vector fields {S, K, ∂_t, ∂_r} as grid operators with
//!   commutator bookkeeping and tangential-derivative inequality reports.
//! - [`asymptotic`]: the reduced near-cone system for Φ = rφ, its
//!   coefficient matrix A_mn(ω), a per-direction integrator, and the
//!   classical-null / weak-null / blow-up classifier.
//! - [`solver`]: second-order finite-difference evolution of the radial
//!   Cauchy problem via the Φ = rφ reduction, with CFL control, blow-up
//!   detection, and a closed-form linear oracle.
//! - [`eikonal`]: characteristic tracing of the perturbed outgoing direction
//!   and verification of the ρ, ρ_q bounds.
//! - [`diagnostics`]: weighted energies, decay-rate fits, and quantitative
//!   checks of the Poincaré, energy, and Sobolev-type inequalities.
//! - [`config`] / [`pipeline`]: scenario files, orchestration, and artifact
//!   emission backing the `nullcone` command-line tool.

pub mod asymptotic;
pub mod config;
pub mod diagnostics;
pub mod eikonal;
pub mod error;
pub mod frame;
pub mod grid;
pub mod output;
pub mod pipeline;
pub mod reports;
pub mod solver;

pub use error::{Error, Result};
