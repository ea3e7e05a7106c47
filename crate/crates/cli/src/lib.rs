//! Configuration-driven experiments for `advect-core`: single runs with
//! step, energy and error tables, and refinement studies with a fitted
//! order of convergence.

pub mod config;
mod error;
pub mod output;
pub mod run;

pub use config::{ExperimentConfig, StudySpec};
pub use error::CliError;
pub use run::{converge_study, run_experiment, RunSummary, StudySummary};
