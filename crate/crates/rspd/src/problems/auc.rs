//! AUC maximization through its quadratic saddle reformulation.
//!
//! The primal variable is `v = [w, a, b]` of dimension `d + 2`; the dual is
//! the scalar `alpha`. With `p` the positive-class fraction, each example
//! contributes
//!
//! `F(v, alpha; (x, z)) = (1-p)(w'x - a)^2 [z=1] + p(w'x - b)^2 [z=-1]
//!  - p(1-p) alpha^2 + 2(1+alpha)(p w'x [z=-1] - (1-p) w'x [z=1])`
//!
//! and the saddle value is the average of `F` plus an optional L2 term on
//! `w`. Maximizing over `alpha` in closed form gives
//! `alpha* = w'(mean_neg - mean_pos)`, an `O(d)` operation once the class
//! means are cached.

use crate::constants::ProblemConstants;
use crate::data::SparseDataset;
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::problem::SaddleProblem;

/// Norm ball constraining `v = [w, a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AucBall {
    L2 { radius: f64 },
    L1 { radius: f64 },
}

#[derive(Debug, Clone)]
pub struct AucProblem {
    dataset: SparseDataset,
    p: f64,
    lambda_reg: f64,
    /// mean_neg - mean_pos, cached for the O(d) best response.
    mean_diff: Vec<f64>,
    test: Option<SparseDataset>,
    constants: ProblemConstants,
    primal_domain: FeasibleSet,
    dual_domain: FeasibleSet,
}

impl AucProblem {
    pub fn new(dataset: SparseDataset, ball: AucBall, lambda_reg: f64) -> Result<Self> {
        let p = dataset.pos_fraction();
        if p <= 0.0 || p >= 1.0 {
            return Err(Error::Degenerate(
                "AUC needs both classes present in the training data".into(),
            ));
        }
        if lambda_reg < 0.0 {
            return Err(Error::Config(format!(
                "lambda_reg must be >= 0, got {lambda_reg}"
            )));
        }
        let d = dataset.dim();
        let primal_domain = match ball {
            AucBall::L2 { radius } => FeasibleSet::l2_ball(vec![0.0; d + 2], radius)?,
            AucBall::L1 { radius } => FeasibleSet::l1_ball(radius)?,
        };
        let radius = match ball {
            AucBall::L2 { radius } | AucBall::L1 { radius } => radius,
        };
        let mean_diff: Vec<f64> = dataset
            .mean_negative()
            .iter()
            .zip(dataset.mean_positive())
            .map(|(n, p)| n - p)
            .collect();
        let pq = p * (1.0 - p);
        let diff_norm = mean_diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let xmax = dataset.max_row_norm();
        // Crude operating-region bounds: |w'x| <= radius * xmax and the
        // scalar dual stays within the same scale.
        let score = radius * xmax;
        let primal_bound = 2.0 * (score + radius) * (xmax + 1.0)
            + 2.0 * (1.0 + score) * xmax
            + lambda_reg * radius;
        let dual_bound = 2.0 * pq * score + 2.0 * score + 2.0 * pq;
        let constants = ProblemConstants {
            primal_grad_bound: primal_bound.max(1e-12),
            dual_grad_bound: dual_bound.max(1e-12),
            holder_constant: 1.0 / (2.0 * pq),
            holder_exponent: 1.0,
            loss_lipschitz: (2.0 * pq * diff_norm).max(1e-12),
            strong_convexity: None,
            leb_constant: None,
            leb_exponent: 0.5,
        };
        Ok(AucProblem {
            dataset,
            p,
            lambda_reg,
            mean_diff,
            test: None,
            constants,
            primal_domain,
            dual_domain: FeasibleSet::WholeSpace,
        })
    }

    /// Attaches a held-out split; the solver metric becomes its AUC.
    pub fn with_test_split(mut self, test: SparseDataset) -> Result<Self> {
        if test.dim() != self.dataset.dim() {
            return Err(Error::Config("train/test feature dimensions differ".into()));
        }
        self.test = Some(test);
        Ok(self)
    }

    pub fn with_grad_bounds(mut self, primal: f64, dual: f64) -> Self {
        self.constants.primal_grad_bound = primal;
        self.constants.dual_grad_bound = dual;
        self
    }

    /// Overrides the error-bound exponent the adaptive solver reads; run
    /// with 0 to treat the exponent as unknown.
    pub fn with_leb_exponent(mut self, theta: f64) -> Self {
        assert!((0.0..=1.0).contains(&theta));
        self.constants.leb_exponent = theta;
        self
    }

    pub fn pos_fraction(&self) -> f64 {
        self.p
    }

    pub fn dataset(&self) -> &SparseDataset {
        &self.dataset
    }

    fn feature_dim(&self) -> usize {
        self.dataset.dim()
    }

    /// Per-example saddle term `F(v, alpha; (x_i, z_i))`.
    fn sample_value(&self, v: &[f64], alpha: f64, i: usize) -> f64 {
        let d = self.feature_dim();
        let (w, ab) = v.split_at(d);
        let (a, b) = (ab[0], ab[1]);
        let p = self.p;
        let wx = self.dataset.row_dot(i, w);
        let pq = p * (1.0 - p);
        if self.dataset.label(i) == 1 {
            (1.0 - p) * (wx - a) * (wx - a) - pq * alpha * alpha
                + 2.0 * (1.0 + alpha) * (-(1.0 - p) * wx)
        } else {
            p * (wx - b) * (wx - b) - pq * alpha * alpha + 2.0 * (1.0 + alpha) * (p * wx)
        }
    }

    fn regularizer_value(&self, v: &[f64]) -> f64 {
        let d = self.feature_dim();
        0.5 * self.lambda_reg * v[..d].iter().map(|x| x * x).sum::<f64>()
    }
}

impl SaddleProblem for AucProblem {
    fn primal_dim(&self) -> usize {
        self.feature_dim() + 2
    }

    fn dual_dim(&self) -> usize {
        1
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
        v: &[f64],
        y: &[f64],
        index: usize,
        grad_x: &mut [f64],
        grad_y: &mut [f64],
    ) {
        assert!(index < self.dataset.len(), "sample index out of range");
        let d = self.feature_dim();
        let (w, ab) = v.split_at(d);
        let (a, b) = (ab[0], ab[1]);
        let alpha = y[0];
        let p = self.p;
        let pq = p * (1.0 - p);
        let wx = self.dataset.row_dot(index, w);

        for (g, wj) in grad_x[..d].iter_mut().zip(w) {
            *g = self.lambda_reg * wj;
        }
        grad_x[d] = 0.0;
        grad_x[d + 1] = 0.0;

        if self.dataset.label(index) == 1 {
            let residual = 2.0 * (1.0 - p) * (wx - a);
            self.dataset.row_add_scaled(
                index,
                residual - 2.0 * (1.0 + alpha) * (1.0 - p),
                &mut grad_x[..d],
            );
            grad_x[d] = -residual;
            grad_y[0] = -2.0 * pq * alpha - 2.0 * (1.0 - p) * wx;
        } else {
            let residual = 2.0 * p * (wx - b);
            self.dataset.row_add_scaled(
                index,
                residual + 2.0 * (1.0 + alpha) * p,
                &mut grad_x[..d],
            );
            grad_x[d + 1] = -residual;
            grad_y[0] = -2.0 * pq * alpha + 2.0 * p * wx;
        }
    }

    /// `alpha* = w'(mean_neg - mean_pos)`, the exact maximizer of the
    /// averaged saddle term (strong concavity `2 p (1-p) > 0`).
    fn best_response(&self, v: &[f64]) -> Vec<f64> {
        let d = self.feature_dim();
        let alpha = v[..d].iter().zip(&self.mean_diff).map(|(w, m)| w * m).sum();
        vec![alpha]
    }

    fn primal_objective(&self, v: &[f64]) -> f64 {
        let alpha = self.best_response(v)[0];
        self.saddle_value(v, &[alpha])
    }

    fn saddle_value(&self, v: &[f64], y: &[f64]) -> f64 {
        let n = self.dataset.len();
        let total: f64 = (0..n).map(|i| self.sample_value(v, y[0], i)).sum();
        total / n as f64 + self.regularizer_value(v)
    }

    fn metric(&self, v: &[f64]) -> Option<f64> {
        let test = self.test.as_ref()?;
        let d = self.feature_dim();
        let scores: Vec<f64> = (0..test.len()).map(|i| test.row_dot(i, &v[..d])).collect();
        auc_metric(&scores, test.labels()).ok()
    }
}

/// Pairwise AUC, ties counting one half, in `O(n log n)` via midranks.
pub fn auc_metric(scores: &[f64], labels: &[i8]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len(), "dimension mismatch");
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Degenerate(
            "AUC needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| {
        scores[i]
            .partial_cmp(&scores[j])
            .expect("scores must not contain NaN")
    });
    // Midranks over tie groups; rank sums of half-integers stay exact.
    let mut rank_sum_pos = 0.0_f64;
    let mut start = 0usize;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[start..=end] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        start = end + 1;
    }
    let np = positives as f64;
    let wins = rank_sum_pos - np * (np + 1.0) / 2.0;
    Ok(wins / (np * negatives as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::read_to_dataset;
    use crate::data::SparseDataset;
    use crate::reference;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> AucProblem {
        let ds = read_to_dataset("1 1:1 2:0.5\n-1 1:-0.5 2:1\n1 2:2\n-1 1:0.25\n").unwrap();
        AucProblem::new(ds, AucBall::L2 { radius: 10.0 }, 0.0).unwrap()
    }

    #[test]
    fn rejects_single_class_data() {
        let ds = read_to_dataset("1 1:1\n1 2:1\n").unwrap();
        assert!(matches!(
            AucProblem::new(ds, AucBall::L2 { radius: 1.0 }, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn best_response_trivial_cases() {
        let p = toy();
        let zero = vec![0.0; p.primal_dim()];
        assert_eq!(p.best_response(&zero), vec![0.0]);
    }

    #[test]
    fn best_response_matches_golden_section() {
        let p = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let v: Vec<f64> = (0..p.primal_dim())
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect();
            let alpha = p.best_response(&v)[0];
            let oracle =
                reference::golden_section_max(|a| p.saddle_value(&v, &[a]), -50.0, 50.0, 1e-5);
            assert!((alpha - oracle).abs() <= 1e-8, "{alpha} vs {oracle}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = toy();
        let dim = p.primal_dim();
        let n = p.sample_count();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-6;
        for _ in 0..10 {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let alpha = rng.gen_range(-1.0..1.0);
            // Average the per-sample gradients: the full gradient of the
            // averaged saddle value.
            let mut avg_v = vec![0.0; dim];
            let mut avg_alpha = 0.0;
            let mut gx = vec![0.0; dim];
            let mut gy = vec![0.0; 1];
            for i in 0..n {
                p.stoch_grad(&v, &[alpha], i, &mut gx, &mut gy);
                for (a, g) in avg_v.iter_mut().zip(&gx) {
                    *a += g / n as f64;
                }
                avg_alpha += gy[0] / n as f64;
            }
            let fd_v = reference::central_difference(|vv| p.saddle_value(vv, &[alpha]), &v, h);
            for (g, f) in avg_v.iter().zip(&fd_v) {
                let scale = f.abs().max(1.0);
                assert!((g - f).abs() / scale <= 1e-5, "{g} vs {f}");
            }
            let fd_alpha =
                reference::central_difference(|aa| p.saddle_value(&v, aa), &[alpha], h)[0];
            // grad_y is the ascent direction, i.e. the derivative itself.
            let scale = fd_alpha.abs().max(1.0);
            assert!((avg_alpha - fd_alpha).abs() / scale <= 1e-5);
        }
    }

    #[test]
    fn averaged_dual_gradient_closed_form() {
        // Mean of the alpha-derivative equals
        // -2p(1-p) alpha + 2p(1-p) w'(mean_neg - mean_pos).
        let p = toy();
        let dim = p.primal_dim();
        let d = dim - 2;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alpha = 0.37;
        let mut avg = 0.0;
        let mut gx = vec![0.0; dim];
        let mut gy = vec![0.0; 1];
        for i in 0..p.sample_count() {
            p.stoch_grad(&v, &[alpha], i, &mut gx, &mut gy);
            avg += gy[0] / p.sample_count() as f64;
        }
        let pq = p.pos_fraction() * (1.0 - p.pos_fraction());
        let drift: f64 = v[..d].iter().zip(&p.mean_diff).map(|(w, m)| w * m).sum();
        let want = -2.0 * pq * alpha + 2.0 * pq * drift;
        assert!((avg - want).abs() <= 1e-12);
    }

    #[test]
    fn objective_dominates_fixed_alpha_values() {
        let p = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..p.primal_dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let best = p.primal_objective(&v);
        for _ in 0..100 {
            let alpha = rng.gen_range(-5.0..5.0);
            assert!(best >= p.saddle_value(&v, &[alpha]) - 1e-12);
        }
    }

    #[test]
    fn degenerate_data_objective_closed_form() {
        // All-zero features: each positive example contributes (1-p) a^2,
        // each negative p b^2, so the average is p(1-p)(a^2 + b^2) at
        // alpha* = 0.
        let rows = vec![vec![(0u32, 0.0)]; 4];
        let labels = vec![1, -1, 1, -1];
        let ds = SparseDataset::from_rows(rows, labels, 1).unwrap();
        let p = AucProblem::new(ds, AucBall::L2 { radius: 10.0 }, 0.0).unwrap();
        let v = vec![0.3, 0.7, -0.4];
        let want = 0.25 * (0.7 * 0.7 + 0.4 * 0.4);
        assert!((p.primal_objective(&v) - want).abs() <= 1e-12);
    }

    #[test]
    fn metric_matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..50 {
            let n = rng.gen_range(5..=200);
            let mut scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut labels: Vec<i8> = (0..n)
                .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
                .collect();
            labels[0] = 1;
            labels[n - 1] = -1;
            if trial % 3 == 0 {
                // Force ties.
                for s in scores.iter_mut() {
                    *s = (*s * 4.0).round() / 4.0;
                }
            }
            let fast = auc_metric(&scores, &labels).unwrap();
            let slow = reference::pairwise_auc(&scores, &labels);
            assert_eq!(fast, slow, "trial {trial}");
        }
    }

    #[test]
    fn metric_trivial_cases() {
        assert_eq!(auc_metric(&[0.9, 0.1], &[1, -1]).unwrap(), 1.0);
        assert_eq!(auc_metric(&[0.4, 0.4, 0.4], &[1, -1, 1]).unwrap(), 0.5);
        assert!(auc_metric(&[0.1, 0.2], &[1, 1]).is_err());
    }
}
