//! The saddle-point problem abstraction consumed by every solver.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::ProblemConstants;
use crate::geometry::FeasibleSet;

/// A convex-concave problem `min_x max_y f(x, y)` given through stochastic
/// subgradient, best-response, and exact-objective oracles.
///
/// Implementations are immutable after construction and safely shareable
/// across concurrent runs; the oracle methods take plain slices so the inner
/// solver loops stay allocation-free.
pub trait SaddleProblem: Send + Sync {
    fn primal_dim(&self) -> usize;

    fn dual_dim(&self) -> usize;

    /// Number of data indices the stochastic oracle samples uniformly.
    fn sample_count(&self) -> usize;

    fn constants(&self) -> &ProblemConstants;

    fn primal_domain(&self) -> &FeasibleSet;

    fn dual_domain(&self) -> &FeasibleSet;

    /// Writes unbiased stochastic subgradients of `f` at `(x, y)` under the
    /// uniformly sampled `index`: `grad_x` is the descent direction for the
    /// primal, `grad_y` the ascent direction for the dual.
    ///
    /// Averaging over all indices at fixed `(x, y)` must equal a full
    /// subgradient of `f`.
    fn stoch_grad(
        &self,
        x: &[f64],
        y: &[f64],
        index: usize,
        grad_x: &mut [f64],
        grad_y: &mut [f64],
    );

    /// The dual best response to `x`: the maximizer of `f(x, .)` over the
    /// dual domain.
    fn best_response(&self, x: &[f64]) -> Vec<f64>;

    /// Exact primal objective `P(x) = max_y f(x, y)`; a full pass over the
    /// data.
    fn primal_objective(&self, x: &[f64]) -> f64;

    /// Exact saddle value `f(x, y)`; a full pass over the data.
    fn saddle_value(&self, x: &[f64], y: &[f64]) -> f64;

    /// Default initial primal point: the origin projected onto the domain.
    fn start_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.primal_dim()];
        self.primal_domain()
            .project_in_place(&mut x)
            .expect("projecting the origin onto the primal domain");
        x
    }

    /// Optional task metric evaluated at `x`, e.g. test AUC.
    fn metric(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Known optimal primal value, when the construction provides one.
    fn optimal_value(&self) -> Option<f64> {
        None
    }
}

/// Default initial-gap bound: `P(x0) - P*` when the optimum is known,
/// otherwise `P(x0)` (valid whenever the losses keep `P* >= 0`).
pub fn default_eps0(problem: &dyn SaddleProblem) -> f64 {
    let x0 = problem.start_point();
    let p0 = problem.primal_objective(&x0);
    let eps0 = match problem.optimal_value() {
        Some(p_star) => p0 - p_star,
        None => p0,
    };
    eps0.max(f64::MIN_POSITIVE)
}

/// Probe-based estimates of the stochastic-gradient norm bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradBoundEstimate {
    pub primal: f64,
    pub dual: f64,
}

/// Estimates the gradient-norm bounds as the maximum stochastic-gradient
/// norm over random probe points around the start point.
///
/// These are empirical estimates over the probed region, not certified
/// bounds; schedules derived from them carry no formal guarantee.
pub fn estimate_grad_bounds(
    problem: &dyn SaddleProblem,
    probes: usize,
    seed: u64,
) -> GradBoundEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = problem.sample_count();
    let start = problem.start_point();
    let mut gx = vec![0.0; problem.primal_dim()];
    let mut gy = vec![0.0; problem.dual_dim()];
    let mut max_primal = 0.0_f64;
    let mut max_dual = 0.0_f64;
    for _ in 0..probes {
        let mut x: Vec<f64> = start
            .iter()
            .map(|&v| v + rng.sample::<f64, _>(StandardNormal))
            .collect();
        problem
            .primal_domain()
            .project_in_place(&mut x)
            .expect("projection during probing");
        let mut y: Vec<f64> = problem
            .best_response(&x)
            .iter()
            .map(|&v| v + 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        problem
            .dual_domain()
            .project_in_place(&mut y)
            .expect("projection during probing");
        let index = rng.gen_range(0..n);
        problem.stoch_grad(&x, &y, index, &mut gx, &mut gy);
        max_primal = max_primal.max(norm(&gx));
        max_dual = max_dual.max(norm(&gy));
    }
    log::warn!(
        "gradient bounds estimated from {probes} probes (primal {max_primal:.3e}, dual {max_dual:.3e}); \
         schedule guarantees require true bounds"
    );
    GradBoundEstimate {
        primal: max_primal,
        dual: max_dual,
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
