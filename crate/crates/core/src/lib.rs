//! Upwind finite-volume solver for the linear advection equation
//! `u_t + div(V u) = 0` with a divergence-free velocity on 2D polygonal
//! meshes, together with the reference solution by characteristics and the
//! diagnostics used to study its convergence (error norms, discrete energy
//! identity, weak-form residual, experimental order of convergence).
//!
//! Module map:
//!
//! * [`mesh`]: polygonal meshes, generators, regularity report, text format.
//! * [`flow`]: stream-function velocity catalog and exact edge fluxes.
//! * [`scheme`]: initial projection, CFL step selection and time stepping.
//! * [`characteristics`]: flow maps and the exact solution `u0(X(x, t))`.
//! * [`analysis`]: error norms, energy functionals, weak form, EOC fitting.

pub mod analysis;
pub mod characteristics;
mod error;
pub mod flow;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod scheme;
pub mod sum;

pub use error::{Error, Result};
pub use geometry::Vec2;
