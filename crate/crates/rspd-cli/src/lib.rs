//! Experiment harness around the `rspd` solvers: declarative JSON configs,
//! per-seed runs, optimal-value estimation with caching, CSV traces, SVG
//! convergence plots, and step-size sweeps.

// Validation uses `!(v > 0.0)` deliberately: the negation rejects NaN,
// which `v <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv;
pub mod error;
pub mod plot;
pub mod pstar;
pub mod runner;
pub mod sweep;

pub use config::{load_config, resolve_outputs, ExperimentConfig};
pub use error::CliError;
