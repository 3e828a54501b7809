//! Restarted stochastic primal-dual solvers for convex-concave problems
//! `min_x max_y y'l(x) - phi*(y) + g(x)` with no bilinear structure assumed.
//!
//! The crate provides:
//!
//! - a [`problem::SaddleProblem`] oracle abstraction with concrete
//!   instances for distributionally robust optimization
//!   ([`problems::DroProblem`]), AUC maximization ([`problems::AucProblem`]),
//!   and a synthetic strongly convex testbed with a known optimum
//!   ([`problems::SyntheticScProblem`]);
//! - Euclidean projections onto the feasible sets the solvers need
//!   ([`geometry`]), each validated against brute-force oracles
//!   ([`reference`]);
//! - theorem-derived restart schedules ([`schedule`]) and the four solvers
//!   ([`algorithms`]): a fixed-step primal-dual baseline and three restarted
//!   variants that periodically recompute the dual best response;
//! - libsvm-format dataset ingestion and deterministic sampling ([`data`]).
//!
//! The long-form guide lives in `book/`; its code listings are compiled and
//! run as doc-tests of this crate.

// Validation uses `!(v > 0.0)` deliberately: the negation rejects NaN,
// which `v <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod constants;
pub mod data;
pub mod error;
pub mod geometry;
pub mod point;
pub mod problem;
pub mod problems;
pub mod reference;
pub mod schedule;
pub mod trace;

pub use constants::ProblemConstants;
pub use error::{Error, Result};
pub use point::{DualPoint, PrimalPoint};
pub use problem::SaddleProblem;
pub use schedule::{Stage, StageSchedule};
pub use trace::{RunTrace, TraceRecord};

// Code listings in the guide double as doc-tests so the book can never
// drift from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(saddle_problems, "../../../book/src/saddle-problems.md");
    chapter!(projections, "../../../book/src/projections.md");
    chapter!(schedules, "../../../book/src/schedules.md");
    chapter!(solvers, "../../../book/src/solvers.md");
    chapter!(robust_learning, "../../../book/src/robust-learning.md");
    chapter!(auc, "../../../book/src/auc.md");
    chapter!(datasets_and_cli, "../../../book/src/datasets-and-cli.md");
}
