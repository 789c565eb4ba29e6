//! Bound states of one-dimensional heavy-light two- and three-body systems.
//!
//! The crate solves the momentum-space bound-state equations for a light particle
//! interacting with one or two heavy particles through a short-range pair potential
//! `v(ξ) = v0 f(ξ)`, and checks the weak-coupling universality of the results against
//! the zero-range contact interaction:
//!
//! * [`potential`] holds the shape catalog, momentum transforms and type classification.
//! * [`numerics`] provides quadrature grids, Krylov eigen-solvers and root bracketing.
//! * [`twobody`] solves the heavy-light bound state and its asymptotic laws.
//! * [`threebody`] solves the heavy-heavy-light spectrum for contact and finite-range pairs.
//! * [`oracle`] contains independent coordinate-space finite-difference solvers.
//! * [`harness`] drives configured runs and sweeps and writes the reports.
//!
//! Units: lengths in the potential range `ξ0`, energies in `ħ²/(μ ξ0²)` with `μ` the
//! heavy-light reduced mass. Three-body energies are reported as ratios
//! `ε = E / |E0⁽²⁾|` and momenta inside the three-body solver are scaled by `q0`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod threebody;
pub mod twobody;

pub use error::{Error, Result};
pub use num_complex::Complex64;
