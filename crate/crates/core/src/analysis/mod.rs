//! Diagnostics of discrete solutions.
//!
//! * [`norms`]: L¹ error against the exact solution, discrete total variation.
//! * [`energy`]: the functionals `E_h`, `Q_h`, `ε_h` and the discrete energy
//!   identity, accumulated step by step.
//! * [`weak`]: the discrete weak formulation with its remainders `μ_h`, `ν_h`.
//! * [`layer_cake`]: decomposition of piecewise-constant data into signed
//!   indicators.
//! * [`test_function`]: the smoothed indicator test function built from the
//!   distance to a polygon boundary.
//! * [`eoc`]: experimental order of convergence and the convergence table.

pub mod energy;
pub mod eoc;
pub mod layer_cake;
pub mod norms;
pub mod test_function;
pub mod weak;

pub use energy::{energy_identity_residual, energy_quantities, EnergyAccumulator, EnergyReport};
pub use eoc::{estimate_eoc, ConvergenceRow, ConvergenceTable, EocFit, CONVERGENCE_HEADER};
pub use layer_cake::{layer_cake_data, layer_cake_decompose, LayerComponent};
pub use norms::{discrete_total_variation, error_report, l1_error, l1_error_adaptive, ErrorReport, L1Measurement};
pub use test_function::{build_proof_test_function, smoothstep, ProofTestFunction};
pub use weak::{weak_form_residual, BumpTestFunction, TestFunction, WeakFormAccumulator, WeakFormResidual};
