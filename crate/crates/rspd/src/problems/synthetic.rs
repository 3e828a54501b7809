//! A synthetic strongly convex saddle problem with a certified optimum,
//! used as the testbed for convergence properties.
//!
//! The coupling is `f(x, y) = y'(Ax) - (lambda_d/2)||y - 1/n||^2
//! + (mu/2)||x - anchor||^2` with `y` on the probability simplex, so the
//! primal objective is `mu`-strongly convex and the dual is
//! `lambda_d`-strongly concave.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::ProblemConstants;
use crate::geometry::{project_simplex, FeasibleSet};
use crate::problem::{estimate_grad_bounds, norm, SaddleProblem};

/// Target operator norm the random coupling matrix is rescaled to.
const TARGET_OPNORM: f64 = 2.0;

/// Gap certificate below which the cached optimum is accepted.
const PSTAR_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SyntheticScProblem {
    n: usize,
    d: usize,
    /// Row-major n x d coupling matrix.
    matrix: Vec<f64>,
    mu: f64,
    lambda_dual: f64,
    /// Pull point of the quadratic primal term.
    anchor: Vec<f64>,
    /// Minimizer of the primal objective, computed at construction.
    x_star: Vec<f64>,
    p_star: f64,
    constants: ProblemConstants,
    primal_domain: FeasibleSet,
    dual_domain: FeasibleSet,
}

/// Builds a random instance: Gaussian coupling matrix rescaled to a fixed
/// operator norm, random anchor, and the optimum certified to `1e-12` by
/// deterministic descent with a strong-convexity gap bound.
pub fn make_synthetic(
    n: usize,
    d: usize,
    mu: f64,
    lambda_dual: f64,
    seed: u64,
) -> SyntheticScProblem {
    assert!(n >= 1 && d >= 1, "dimensions must be >= 1");
    assert!(mu > 0.0 && lambda_dual > 0.0, "moduli must be > 0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix: Vec<f64> = (0..n * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let opnorm = operator_norm(&matrix, n, d);
    if opnorm > 0.0 {
        let scale = TARGET_OPNORM / opnorm;
        for v in &mut matrix {
            *v *= scale;
        }
    }
    let anchor: Vec<f64> = (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();

    let mut problem = SyntheticScProblem {
        n,
        d,
        matrix,
        mu,
        lambda_dual,
        anchor,
        x_star: vec![0.0; d],
        p_star: 0.0,
        constants: ProblemConstants {
            primal_grad_bound: 1.0,
            dual_grad_bound: 1.0,
            holder_constant: 1.0 / lambda_dual,
            holder_exponent: 1.0,
            loss_lipschitz: TARGET_OPNORM,
            strong_convexity: Some(mu),
            leb_constant: Some((2.0 / mu).sqrt()),
            leb_exponent: 0.5,
        },
        primal_domain: FeasibleSet::WholeSpace,
        dual_domain: FeasibleSet::Simplex { dim: n },
    };
    let (x_star, p_star) = problem.minimize_primal();
    problem.x_star = x_star;
    problem.p_star = p_star;

    let bounds = estimate_grad_bounds(&problem, 1000, seed ^ 0x9e37_79b9);
    problem.constants.primal_grad_bound = 1.25 * bounds.primal.max(1e-6);
    problem.constants.dual_grad_bound = 1.25 * bounds.dual.max(1e-6);
    problem
}

impl SyntheticScProblem {
    fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.d..(i + 1) * self.d]
    }

    /// `Ax`.
    fn coupling(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// Gradient of the primal objective: `A'y*(x) + mu (x - anchor)`.
    fn primal_gradient(&self, x: &[f64]) -> Vec<f64> {
        let y = self.best_response(x);
        let mut grad: Vec<f64> = x
            .iter()
            .zip(&self.anchor)
            .map(|(xi, ai)| self.mu * (xi - ai))
            .collect();
        for (i, &weight) in y.iter().enumerate() {
            if weight != 0.0 {
                for (g, a) in grad.iter_mut().zip(self.row(i)) {
                    *g += weight * a;
                }
            }
        }
        grad
    }

    /// Deterministic gradient descent on the smooth primal objective until
    /// the strong-convexity certificate `||grad||^2 / (2 mu)` is below the
    /// optimum tolerance.
    fn minimize_primal(&self) -> (Vec<f64>, f64) {
        let lipschitz = self.mu + TARGET_OPNORM * TARGET_OPNORM / self.lambda_dual;
        let step = 1.0 / lipschitz;
        let mut x = self.anchor.clone();
        for _ in 0..2_000_000u64 {
            let grad = self.primal_gradient(&x);
            let certificate = grad.iter().map(|g| g * g).sum::<f64>() / (2.0 * self.mu);
            if certificate <= PSTAR_TOL {
                break;
            }
            for (xi, g) in x.iter_mut().zip(&grad) {
                *xi -= step * g;
            }
        }
        let value = self.primal_objective(&x);
        (x, value)
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    /// Overrides the probe-based gradient bounds.
    pub fn with_grad_bounds(mut self, primal: f64, dual: f64) -> Self {
        self.constants.primal_grad_bound = primal;
        self.constants.dual_grad_bound = dual;
        self
    }

    /// Overrides the error-bound exponent the adaptive solver reads.
    pub fn with_leb_exponent(mut self, theta: f64) -> Self {
        assert!((0.0..=1.0).contains(&theta));
        self.constants.leb_exponent = theta;
        self
    }
}

impl SaddleProblem for SyntheticScProblem {
    fn primal_dim(&self) -> usize {
        self.d
    }

    fn dual_dim(&self) -> usize {
        self.n
    }

    fn sample_count(&self) -> usize {
        self.n
    }

    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    fn primal_domain(&self) -> &FeasibleSet {
        &self.primal_domain
    }

    fn dual_domain(&self) -> &FeasibleSet {
        &self.dual_domain
    }

    fn stoch_grad(
        &self,
        x: &[f64],
        y: &[f64],
        index: usize,
        grad_x: &mut [f64],
        grad_y: &mut [f64],
    ) {
        assert!(index < self.n, "sample index out of range");
        let n = self.n as f64;
        let row = self.row(index);
        let scale = n * y[index];
        for j in 0..self.d {
            grad_x[j] = scale * row[j] + self.mu * (x[j] - self.anchor[j]);
        }
        let uniform = 1.0 / n;
        for i in 0..self.n {
            grad_y[i] = -self.lambda_dual * (y[i] - uniform);
        }
        grad_y[index] += n * dot(row, x);
    }

    fn best_response(&self, x: &[f64]) -> Vec<f64> {
        let mut target = self.coupling(x);
        let uniform = 1.0 / self.n as f64;
        for v in &mut target {
            *v = uniform + *v / self.lambda_dual;
        }
        project_simplex(&target)
    }

    fn primal_objective(&self, x: &[f64]) -> f64 {
        let y = self.best_response(x);
        self.saddle_value(x, &y)
    }

    fn saddle_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let coupling = self.coupling(x);
        let uniform = 1.0 / self.n as f64;
        let linear: f64 = y.iter().zip(&coupling).map(|(yi, ci)| yi * ci).sum();
        let divergence: f64 = y.iter().map(|yi| (yi - uniform) * (yi - uniform)).sum();
        let mut dist2 = 0.0;
        for (xi, ai) in x.iter().zip(&self.anchor) {
            dist2 += (xi - ai) * (xi - ai);
        }
        linear - 0.5 * self.lambda_dual * divergence + 0.5 * self.mu * dist2
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.p_star)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest singular value by power iteration on `A'A`.
fn operator_norm(matrix: &[f64], n: usize, d: usize) -> f64 {
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut sigma = 0.0;
    for _ in 0..200 {
        // u = A v, w = A' u
        let u: Vec<f64> = (0..n)
            .map(|i| dot(&matrix[i * d..(i + 1) * d], &v))
            .collect();
        let mut w = vec![0.0; d];
        for i in 0..n {
            for j in 0..d {
                w[j] += matrix[i * d + j] * u[i];
            }
        }
        let w_norm = norm(&w);
        if w_norm == 0.0 {
            return 0.0;
        }
        for (vj, wj) in v.iter_mut().zip(&w) {
            *vj = wj / w_norm;
        }
        sigma = norm(&u);
    }
    sigma
}
