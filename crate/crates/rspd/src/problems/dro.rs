//! Distributionally robust optimization over the probability simplex with
//! the hinge loss and a squared-distance divergence penalty:
//!
//! `f(x, y) = sum_i y_i l_i(x) - (lambda1/2) ||n y - 1||^2 + g(x)` where
//! `l_i(x) = max(0, 1 - b_i a_i'x)` and `g` is an L2 or L1 regularizer.

use crate::constants::ProblemConstants;
use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::geometry::{project_simplex, FeasibleSet};
use crate::problem::SaddleProblem;

/// Regularizer on the model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    /// `(lambda2/2) ||x||^2`; makes the primal objective strongly convex.
    L2Squared,
    /// `lambda2 ||x||_1`; the primal objective is then piecewise quadratic
    /// and satisfies a local error bound with exponent 1/2.
    L1,
}

#[derive(Debug, Clone)]
pub struct DroProblem {
    dataset: SparseDataset,
    lambda1: f64,
    lambda2: f64,
    regularizer: Regularizer,
    constants: ProblemConstants,
    primal_domain: FeasibleSet,
    dual_domain: FeasibleSet,
}

impl DroProblem {
    /// Builds the problem with data-derived default constants. The gradient
    /// bounds are crude operating-region values (unit primal ball); replace
    /// them with [`DroProblem::with_grad_bounds`] or probe-based estimates
    /// for schedules that matter.
    pub fn new(
        dataset: SparseDataset,
        lambda1: f64,
        lambda2: f64,
        regularizer: Regularizer,
    ) -> Result<Self> {
        if !(lambda1 > 0.0) {
            return Err(Error::Config(format!("lambda1 must be > 0, got {lambda1}")));
        }
        if !(lambda2 > 0.0) {
            return Err(Error::Config(format!("lambda2 must be > 0, got {lambda2}")));
        }
        let n = dataset.len();
        let d = dataset.dim();
        let nf = n as f64;
        let max_norm = dataset.max_row_norm();
        let frobenius = (0..n)
            .map(|i| dataset.row_norm(i).powi(2))
            .sum::<f64>()
            .sqrt();
        let reg_bound = match regularizer {
            Regularizer::L2Squared => lambda2,
            Regularizer::L1 => lambda2 * (d as f64).sqrt(),
        };
        // ||n y - 1|| <= sqrt(n^2 - n) on the simplex; losses <= 1 + ||a_i||
        // for ||x|| <= 1.
        let primal_bound = nf * max_norm + reg_bound;
        let dual_bound = nf * (1.0 + max_norm) + lambda1 * nf * (nf * nf - nf).sqrt();
        let constants = ProblemConstants {
            primal_grad_bound: primal_bound.max(1e-12),
            dual_grad_bound: dual_bound.max(1e-12),
            holder_constant: 1.0 / (lambda1 * nf * nf),
            holder_exponent: 1.0,
            loss_lipschitz: frobenius.max(1e-12),
            strong_convexity: match regularizer {
                Regularizer::L2Squared => Some(lambda2),
                Regularizer::L1 => None,
            },
            leb_constant: None,
            leb_exponent: 0.5,
        };
        Ok(DroProblem {
            dataset,
            lambda1,
            lambda2,
            regularizer,
            constants,
            primal_domain: FeasibleSet::WholeSpace,
            dual_domain: FeasibleSet::Simplex { dim: n },
        })
    }

    pub fn with_grad_bounds(mut self, primal: f64, dual: f64) -> Self {
        self.constants.primal_grad_bound = primal;
        self.constants.dual_grad_bound = dual;
        self
    }

    pub fn with_primal_domain(mut self, domain: FeasibleSet) -> Self {
        self.primal_domain = domain;
        self
    }

    pub fn dataset(&self) -> &SparseDataset {
        &self.dataset
    }

    /// Hinge losses of every example: `l_i = max(0, 1 - b_i a_i'x)`.
    pub fn loss_vector(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dataset.len())
            .map(|i| {
                let margin = 1.0 - self.dataset.label(i) as f64 * self.dataset.row_dot(i, x);
                margin.max(0.0)
            })
            .collect()
    }

    fn regularizer_value(&self, x: &[f64]) -> f64 {
        match self.regularizer {
            Regularizer::L2Squared => 0.5 * self.lambda2 * x.iter().map(|v| v * v).sum::<f64>(),
            Regularizer::L1 => self.lambda2 * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    fn write_regularizer_grad(&self, x: &[f64], out: &mut [f64]) {
        match self.regularizer {
            Regularizer::L2Squared => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = self.lambda2 * v;
                }
            }
            Regularizer::L1 => {
                // Subgradient 0 at the kink.
                for (o, v) in out.iter_mut().zip(x) {
                    *o = if *v > 0.0 {
                        self.lambda2
                    } else if *v < 0.0 {
                        -self.lambda2
                    } else {
                        0.0
                    };
                }
            }
        }
    }

    /// Divergence penalty `(lambda1/2)||n y - 1||^2`.
    fn divergence(&self, y: &[f64]) -> f64 {
        let n = self.dataset.len() as f64;
        let sq: f64 = y.iter().map(|yi| (n * yi - 1.0) * (n * yi - 1.0)).sum();
        0.5 * self.lambda1 * sq
    }
}

impl SaddleProblem for DroProblem {
    fn primal_dim(&self) -> usize {
        self.dataset.dim()
    }

    fn dual_dim(&self) -> usize {
        self.dataset.len()
    }

    fn sample_count(&self) -> usize {
        self.dataset.len()
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
        let n = self.dataset.len();
        assert!(index < n, "sample index out of range");
        let nf = n as f64;
        let label = self.dataset.label(index) as f64;
        let margin = 1.0 - label * self.dataset.row_dot(index, x);

        self.write_regularizer_grad(x, grad_x);
        if margin > 0.0 {
            // Subgradient of the hinge is -b_i a_i on the active side, 0 at
            // the kink.
            self.dataset
                .row_add_scaled(index, -nf * y[index] * label, grad_x);
        }

        for (g, yi) in grad_y.iter_mut().zip(y) {
            *g = -self.lambda1 * nf * (nf * yi - 1.0);
        }
        grad_y[index] += nf * margin.max(0.0);
    }

    /// Closed form: the unconstrained maximizer `1/n + l(x)/(lambda1 n^2)`
    /// projected onto the simplex.
    fn best_response(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dataset.len() as f64;
        let losses = self.loss_vector(x);
        let target: Vec<f64> = losses
            .iter()
            .map(|l| 1.0 / n + l / (self.lambda1 * n * n))
            .collect();
        project_simplex(&target)
    }

    fn primal_objective(&self, x: &[f64]) -> f64 {
        let losses = self.loss_vector(x);
        let n = self.dataset.len() as f64;
        let target: Vec<f64> = losses
            .iter()
            .map(|l| 1.0 / n + l / (self.lambda1 * n * n))
            .collect();
        let y = project_simplex(&target);
        let coupled: f64 = y.iter().zip(&losses).map(|(yi, li)| yi * li).sum();
        coupled - self.divergence(&y) + self.regularizer_value(x)
    }

    fn saddle_value(&self, x: &[f64], y: &[f64]) -> f64 {
        let losses = self.loss_vector(x);
        let coupled: f64 = y.iter().zip(&losses).map(|(yi, li)| yi * li).sum();
        coupled - self.divergence(y) + self.regularizer_value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::read_to_dataset;
    use crate::geometry::project_simplex;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> DroProblem {
        let ds = read_to_dataset("1 1:2\n-1 1:0.5\n1 2:1\n").unwrap();
        DroProblem::new(ds, 1.0, 0.1, Regularizer::L2Squared).unwrap()
    }

    #[test]
    fn hinge_loss_values() {
        let p = toy();
        // x = 0 gives margin 0 and loss 1 everywhere.
        assert_eq!(p.loss_vector(&[0.0, 0.0]), vec![1.0, 1.0, 1.0]);
        // a = [2], b = +1, x = [1, 0]: max(0, 1 - 2) = 0.
        // a = [0.5], b = -1: max(0, 1 + 0.5) = 1.5.
        assert_eq!(p.loss_vector(&[1.0, 0.0])[..2], [0.0, 1.5]);
    }

    #[test]
    fn objective_at_origin_is_mean_loss() {
        // l = 1 everywhere, so the maximizer is uniform and P(0) = 1.
        let p = toy();
        assert!((p.primal_objective(&[0.0, 0.0]) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn best_response_uniform_for_constant_losses() {
        let p = toy();
        let y = p.best_response(&[0.0, 0.0]);
        for v in &y {
            assert!((v - 1.0 / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn best_response_pinned_by_large_divergence() {
        let ds = read_to_dataset("1 1:2\n-1 1:0.5\n1 2:1\n").unwrap();
        let p = DroProblem::new(ds, 1e9, 0.1, Regularizer::L2Squared).unwrap();
        let y = p.best_response(&[0.7, -0.4]);
        for v in &y {
            assert!((v - 1.0 / 3.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn best_response_matches_grid_oracle() {
        let p = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let losses = p.loss_vector(&x);
            let dual_value = |y: &[f64]| {
                let coupled: f64 = y.iter().zip(&losses).map(|(a, b)| a * b).sum();
                coupled - p.divergence(y)
            };
            let value = dual_value(&p.best_response(&x));
            let oracle = crate::reference::simplex3_grid_max(|y| dual_value(&y[..]), 2000);
            assert!(value >= oracle - 1e-6);
        }
    }

    #[test]
    fn stochastic_gradients_average_to_full_gradient() {
        for reg in [Regularizer::L2Squared, Regularizer::L1] {
            let ds = read_to_dataset("1 1:2 2:-1\n-1 1:0.5\n1 2:1\n0 1:-1 2:0.25\n").unwrap();
            let p = DroProblem::new(ds, 0.5, 0.2, reg).unwrap();
            let n = 4usize;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..20 {
                let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let y =
                    project_simplex(&(0..n).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<_>>());
                let mut avg_x = vec![0.0; 2];
                let mut avg_y = vec![0.0; n];
                let mut gx = vec![0.0; 2];
                let mut gy = vec![0.0; n];
                for i in 0..n {
                    p.stoch_grad(&x, &y, i, &mut gx, &mut gy);
                    for (a, g) in avg_x.iter_mut().zip(&gx) {
                        *a += g / n as f64;
                    }
                    for (a, g) in avg_y.iter_mut().zip(&gy) {
                        *a += g / n as f64;
                    }
                }
                // Full-pass subgradient: sum_i y_i dl_i + dg and
                // l(x) - lambda1 n (n y - 1).
                let mut full_x = vec![0.0; 2];
                p.write_regularizer_grad(&x, &mut full_x);
                for (i, &weight) in y.iter().enumerate() {
                    let label = p.dataset.label(i) as f64;
                    if 1.0 - label * p.dataset.row_dot(i, &x) > 0.0 {
                        p.dataset.row_add_scaled(i, -weight * label, &mut full_x);
                    }
                }
                let losses = p.loss_vector(&x);
                let nf = n as f64;
                let full_y: Vec<f64> = (0..n)
                    .map(|i| losses[i] - p.lambda1 * nf * (nf * y[i] - 1.0))
                    .collect();
                for (a, f) in avg_x.iter().zip(&full_x) {
                    assert!((a - f).abs() <= 1e-10, "{avg_x:?} vs {full_x:?}");
                }
                for (a, f) in avg_y.iter().zip(&full_y) {
                    assert!((a - f).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn dual_gradient_componentwise_toy() {
        // n = 2, y = [0.7, 0.3], one active loss; against the full-gradient
        // identity evaluated by hand.
        let ds = read_to_dataset("1 1:2\n-1 1:-3\n").unwrap();
        let p = DroProblem::new(ds, 0.5, 0.1, Regularizer::L2Squared).unwrap();
        let x = [1.0];
        // Example 1: margin = 1 - 2 = -1 (inactive, loss 0).
        // Example 2: margin = 1 - 3 = -2 (inactive, loss 0)?
        // b = -1, a = -3: margin = 1 - (-1)(-3 * 1) = 1 - 3 = -2. Loss 0.
        let y = [0.7, 0.3];
        let mut gx = vec![0.0; 1];
        let mut gy = vec![0.0; 2];
        p.stoch_grad(&x, &y, 0, &mut gx, &mut gy);
        // Loss 0 at index 0: gy = 2*0*e_0 - 0.5*2*(2y - 1).
        assert!((gy[0] - (-0.5 * 2.0 * (2.0 * 0.7 - 1.0))).abs() <= 1e-12);
        assert!((gy[1] - (-0.5 * 2.0 * (2.0 * 0.3 - 1.0))).abs() <= 1e-12);
        // Inactive hinge leaves only the regularizer in the primal gradient.
        assert!((gx[0] - 0.1 * 1.0).abs() <= 1e-12);
    }

    #[test]
    fn l1_objective_is_piecewise_quadratic_along_slices() {
        // The second difference of a piecewise quadratic along a line is
        // piecewise constant; scan for that structure.
        let ds = read_to_dataset("1 1:2 2:-1\n-1 1:0.5\n1 2:1\n").unwrap();
        let p = DroProblem::new(ds, 0.7, 0.3, Regularizer::L1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-3;
        for _ in 0..100 {
            let origin: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dir: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let value = |t: f64| {
                let x: Vec<f64> = origin.iter().zip(&dir).map(|(o, d)| o + t * d).collect();
                p.primal_objective(&x)
            };
            let second_diffs: Vec<f64> = (0..40)
                .map(|k| {
                    let t = k as f64 * h;
                    (value(t + h) - 2.0 * value(t) + value(t - h)) / (h * h)
                })
                .collect();
            // Count how many distinct plateau levels appear; transitions are
            // sparse for a piecewise quadratic.
            let mut changes = 0;
            for w in second_diffs.windows(2) {
                if (w[1] - w[0]).abs() > 1e-6 * (1.0 + w[0].abs()) {
                    changes += 1;
                }
            }
            assert!(changes <= 12, "second difference changed {changes} times");
        }
    }
}
