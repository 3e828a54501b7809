//! Concrete saddle-point problems: distributionally robust optimization with
//! the hinge loss, AUC maximization, and a synthetic strongly convex
//! testbed with an analytically certified optimum.

pub mod auc;
pub mod dro;
pub mod synthetic;

pub use auc::{auc_metric, AucBall, AucProblem};
pub use dro::{DroProblem, Regularizer};
pub use synthetic::{make_synthetic, SyntheticScProblem};
