//! Stage schedules: per-stage step sizes, iteration counts, radii, and
//! target accuracies for the restarted solvers.

use crate::constants::ProblemConstants;
use crate::error::{Error, Result};

/// Parameters of one restart stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    /// Primal step size.
    pub eta_x: f64,
    /// Dual step size.
    pub eta_y: f64,
    /// Inner iterations in this stage.
    pub iterations: u64,
    /// Primal ball radius around the stage's start point, when the solver
    /// confines iterates to shrinking balls.
    pub radius_x: Option<f64>,
    /// Dual ball radius.
    pub radius_y: Option<f64>,
    /// Target accuracy at the end of the stage.
    pub target_eps: f64,
}

/// A full restart schedule.
///
/// Step sizes halve exactly from stage to stage and target accuracies halve;
/// iteration counts either double (strongly convex mode) or stay constant
/// (error-bound mode, where the radii shrink instead).
#[derive(Debug, Clone, PartialEq)]
pub struct StageSchedule {
    pub stages: Vec<Stage>,
}

impl StageSchedule {
    pub fn total_iterations(&self) -> u64 {
        self.stages.iter().map(|s| s.iterations).sum()
    }

    /// Replaces the initial step sizes, regenerating the exact halving
    /// recurrence across stages.
    pub fn with_initial_steps(mut self, eta_x1: Option<f64>, eta_y1: Option<f64>) -> Self {
        if let Some(eta) = eta_x1 {
            let mut value = eta;
            for stage in &mut self.stages {
                stage.eta_x = value;
                value *= 0.5;
            }
        }
        if let Some(eta) = eta_y1 {
            let mut value = eta;
            for stage in &mut self.stages {
                stage.eta_y = value;
                value *= 0.5;
            }
        }
        self
    }
}

/// Number of halving stages needed to bring `eps0` down to `eps`.
pub(crate) fn stage_count(eps0: f64, eps: f64) -> Result<usize> {
    if !(eps0 > 0.0 && eps > 0.0) {
        return Err(Error::InvalidAccuracy(format!(
            "accuracies must be positive, got eps0 = {eps0}, eps = {eps}"
        )));
    }
    if eps >= eps0 {
        return Err(Error::InvalidAccuracy(format!(
            "target accuracy {eps} must be below the initial gap bound {eps0}"
        )));
    }
    // The tiny slack keeps exact powers of two (eps = eps0 / 2^k) at k stages
    // despite the floating-point log.
    let s = ((eps0 / eps).log2() - 1e-9).ceil();
    Ok((s as usize).max(1))
}

/// Schedule for the strongly convex restarted solver: doubling iteration
/// counts, halving step sizes, no radii.
///
/// The first stage runs `T1 = ceil(max(405 M^2, 810 L^2 G^2 B^2) / (mu eps0))`
/// iterations with `eta_x = 2 eps0 / (45 M^2)` and `eta_y = 2 eps0 / (45 B^2)`
/// unless overridden.
pub fn make_sc_schedule(
    constants: &ProblemConstants,
    eps0: f64,
    eps: f64,
    t1_override: Option<u64>,
) -> Result<StageSchedule> {
    constants.validate()?;
    let mu = constants.strong_convexity.ok_or_else(|| {
        Error::Config("strongly convex schedule requires a strong-convexity modulus".into())
    })?;
    let stages_needed = stage_count(eps0, eps)?;

    let m2 = constants.primal_grad_bound * constants.primal_grad_bound;
    let b2 = constants.dual_grad_bound * constants.dual_grad_bound;
    let l2 = constants.holder_constant * constants.holder_constant;
    let g2 = constants.loss_lipschitz * constants.loss_lipschitz;

    let t1 = match t1_override {
        Some(t) => {
            if t == 0 {
                return Err(Error::Config("iteration override must be >= 1".into()));
            }
            t
        }
        None => {
            let raw = (405.0 * m2).max(810.0 * l2 * g2 * b2) / (mu * eps0);
            checked_iterations(raw)?
        }
    };

    let mut stages = Vec::with_capacity(stages_needed);
    let mut eta_x = 2.0 * eps0 / (45.0 * m2);
    let mut eta_y = 2.0 * eps0 / (45.0 * b2);
    let mut iterations = t1;
    let mut target = eps0 * 0.5;
    for s in 0..stages_needed {
        stages.push(Stage {
            eta_x,
            eta_y,
            iterations,
            radius_x: None,
            radius_y: None,
            target_eps: target,
        });
        if s + 1 < stages_needed {
            eta_x *= 0.5;
            eta_y *= 0.5;
            // Deep schedules saturate instead of overflowing; budget caps
            // stop runs long before this matters.
            iterations = iterations.saturating_mul(2).min(1 << 62);
            target *= 0.5;
        }
    }
    Ok(StageSchedule { stages })
}

/// Schedule for the error-bound restarted solver: constant iteration count,
/// halving step sizes, shrinking stage balls.
///
/// The constant `T` is the maximum of the four per-stage lower bounds
/// evaluated at the final stage, which is the binding one since
/// `R^(2v)/eps^2` grows with the stage index when `v < 1`.
pub fn make_leb_schedule(
    constants: &ProblemConstants,
    eps0: f64,
    eps: f64,
    delta: f64,
    r_x1: f64,
    t_override: Option<u64>,
) -> Result<StageSchedule> {
    constants.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(r_x1 > 0.0 && r_x1.is_finite()) {
        return Err(Error::Config(format!(
            "initial radius must be > 0, got {r_x1}"
        )));
    }
    let stages_needed = stage_count(eps0, eps)?;
    if let Some(c) = constants.leb_constant {
        let required = c * eps0 / eps.powf(1.0 - constants.leb_exponent);
        if r_x1 < required * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "initial radius {r_x1:e} is below the error-bound requirement {required:e}"
            )));
        }
    }

    let m2 = constants.primal_grad_bound * constants.primal_grad_bound;
    let b2 = constants.dual_grad_bound * constants.dual_grad_bound;
    let v = constants.holder_exponent;
    let l2 = constants.holder_constant * constants.holder_constant;
    let g2v = constants.loss_lipschitz.powf(2.0 * v);
    let r_y1 = constants.holder_constant * constants.loss_lipschitz.powf(v) * r_x1.powf(v);

    let iterations = match t_override {
        Some(t) => {
            if t == 0 {
                return Err(Error::Config("iteration override must be >= 1".into()));
            }
            t
        }
        None => {
            let delta_tilde = delta / stages_needed as f64;
            let log_term = (1.0 / delta_tilde).ln();
            let shrink = 0.5_f64.powi(stages_needed as i32 - 1);
            let r_last = r_x1 * shrink;
            let eps_prev = eps0 * shrink;
            let ratio2 = (r_last / eps_prev) * (r_last / eps_prev);
            let ratio2v = r_last.powf(2.0 * v) / (eps_prev * eps_prev);
            let raw = (320.0 * m2 * ratio2)
                .max(320.0 * b2 * l2 * g2v * ratio2v)
                .max(8192.0 * log_term * m2 * ratio2)
                .max(8192.0 * log_term * b2 * l2 * g2v * ratio2v);
            checked_iterations(raw)?
        }
    };

    let dual_shrink = 0.5_f64.powf(v);
    let mut stages = Vec::with_capacity(stages_needed);
    let mut eta_x = eps0 / (40.0 * m2);
    let mut eta_y = eps0 / (40.0 * b2);
    let mut radius_x = r_x1;
    let mut radius_y = r_y1;
    let mut target = eps0 * 0.5;
    for s in 0..stages_needed {
        stages.push(Stage {
            eta_x,
            eta_y,
            iterations,
            radius_x: Some(radius_x),
            radius_y: Some(radius_y),
            target_eps: target,
        });
        if s + 1 < stages_needed {
            eta_x *= 0.5;
            eta_y *= 0.5;
            radius_x *= 0.5;
            radius_y *= dual_shrink;
            target *= 0.5;
        }
    }
    Ok(StageSchedule { stages })
}

fn checked_iterations(raw: f64) -> Result<u64> {
    if !raw.is_finite() || raw >= 2.0_f64.powi(62) {
        return Err(Error::Config(format!(
            "derived iteration count {raw:e} is not representable"
        )));
    }
    Ok((raw.ceil() as u64).max(1))
}

/// One step of incremental averaging: returns
/// `prev_avg + (new_point - prev_avg) / count_after`.
///
/// Applied with `count_after = 1..=T` starting from zeros, this yields the
/// arithmetic mean of the `T` points.
pub fn running_average(prev_avg: &[f64], new_point: &[f64], count_after: u64) -> Vec<f64> {
    let mut out = prev_avg.to_vec();
    running_average_in_place(&mut out, new_point, count_after);
    out
}

pub fn running_average_in_place(avg: &mut [f64], new_point: &[f64], count_after: u64) {
    assert_eq!(avg.len(), new_point.len(), "dimension mismatch");
    assert!(count_after >= 1, "count_after must be >= 1");
    let inv = 1.0 / count_after as f64;
    for (a, v) in avg.iter_mut().zip(new_point) {
        *a += (v - *a) * inv;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::direct_mean;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn constants() -> ProblemConstants {
        ProblemConstants {
            primal_grad_bound: 3.0,
            dual_grad_bound: 3.0,
            holder_constant: 1.0,
            holder_exponent: 1.0,
            loss_lipschitz: 1.0,
            strong_convexity: Some(1.0),
            leb_constant: None,
            leb_exponent: 0.5,
        }
    }

    #[test]
    fn sc_schedule_matches_direct_evaluation() {
        // M = B = 3, L = G = mu = 1, eps0 = 1, eps = 1/8.
        let s = make_sc_schedule(&constants(), 1.0, 0.125, None).unwrap();
        assert_eq!(s.stages.len(), 3);
        assert_eq!(s.stages[0].eta_x, 2.0 / 405.0);
        assert_eq!(s.stages[0].eta_y, 2.0 / 405.0);
        // max(405 * 9, 810 * 9) / 1 = 7290.
        assert_eq!(s.stages[0].iterations, 7290);
        assert_eq!(s.stages[1].iterations, 14580);
        assert_eq!(s.stages[2].iterations, 29160);
    }

    #[test]
    fn sc_schedule_honors_override_and_doubles() {
        let s = make_sc_schedule(&constants(), 1.0, 0.25, Some(10_000)).unwrap();
        assert_eq!(s.stages[0].iterations, 10_000);
        assert_eq!(s.stages[1].iterations, 20_000);
    }

    #[test]
    fn single_stage_when_target_is_half() {
        let s = make_sc_schedule(&constants(), 1.0, 0.5, None).unwrap();
        assert_eq!(s.stages.len(), 1);
    }

    #[test]
    fn sc_schedule_recurrences_exact() {
        let s = make_sc_schedule(&constants(), 0.7, 0.7 / 64.0, None).unwrap();
        assert_eq!(s.stages.len(), 6);
        for w in s.stages.windows(2) {
            assert_eq!(w[1].eta_x, w[0].eta_x * 0.5);
            assert_eq!(w[1].eta_y, w[0].eta_y * 0.5);
            assert_eq!(w[1].iterations, w[0].iterations * 2);
            assert_eq!(w[1].target_eps, w[0].target_eps * 0.5);
        }
    }

    #[test]
    fn sc_schedule_rejects_missing_modulus_and_bad_accuracy() {
        let mut c = constants();
        c.strong_convexity = None;
        assert!(matches!(
            make_sc_schedule(&c, 1.0, 0.5, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            make_sc_schedule(&constants(), 1.0, 1.0, None),
            Err(Error::InvalidAccuracy(_))
        ));
        assert!(matches!(
            make_sc_schedule(&constants(), 0.5, 1.0, None),
            Err(Error::InvalidAccuracy(_))
        ));
    }

    #[test]
    fn leb_iteration_bound_direct_evaluation() {
        // v = 1, M = B = L = G = 1, R1 = eps0, delta chosen so ln(1/dt) = 1:
        // one stage makes delta_tilde = delta, so use delta = 1/e.
        let c = ProblemConstants {
            primal_grad_bound: 1.0,
            dual_grad_bound: 1.0,
            holder_constant: 1.0,
            holder_exponent: 1.0,
            loss_lipschitz: 1.0,
            strong_convexity: None,
            leb_constant: None,
            leb_exponent: 0.5,
        };
        let s = make_leb_schedule(&c, 1.0, 0.5, (-1.0_f64).exp(), 1.0, None).unwrap();
        assert_eq!(s.stages.len(), 1);
        assert_eq!(s.stages[0].iterations, 8192);
        assert_eq!(s.stages[0].eta_x, 1.0 / 40.0);
    }

    #[test]
    fn leb_ratio_stage_independent_when_smooth() {
        // v = 1: R^2 / eps^2 is constant, so T is the same whether computed
        // for one stage or many.
        let c = ProblemConstants {
            primal_grad_bound: 2.0,
            dual_grad_bound: 1.5,
            holder_constant: 1.0,
            holder_exponent: 1.0,
            loss_lipschitz: 1.0,
            strong_convexity: None,
            leb_constant: None,
            leb_exponent: 0.5,
        };
        let short = make_leb_schedule(&c, 1.0, 0.5, 0.04, 0.8, None).unwrap();
        let long = make_leb_schedule(&c, 1.0, 1.0 / 32.0, 0.2, 0.8, None).unwrap();
        // delta scaled by the stage count keeps delta_tilde equal.
        assert_eq!(short.stages[0].iterations, long.stages[0].iterations);
    }

    #[test]
    fn leb_dual_radius_constant_at_exponent_zero() {
        let c = ProblemConstants {
            primal_grad_bound: 1.0,
            dual_grad_bound: 1.0,
            holder_constant: 1.7,
            holder_exponent: 0.0,
            loss_lipschitz: 3.0,
            strong_convexity: None,
            leb_constant: None,
            leb_exponent: 0.0,
        };
        let s = make_leb_schedule(&c, 1.0, 1.0 / 16.0, 0.1, 2.0, Some(100)).unwrap();
        for stage in &s.stages {
            // G^0 = R^0 = 1, so the dual radius stays at L forever.
            assert_eq!(stage.radius_y, Some(1.7));
        }
        for w in s.stages.windows(2) {
            assert_eq!(w[1].radius_x.unwrap(), w[0].radius_x.unwrap() * 0.5);
            assert_eq!(w[1].iterations, w[0].iterations);
        }
    }

    #[test]
    fn leb_schedule_rejects_radius_below_requirement() {
        let mut c = constants();
        c.leb_constant = Some(1.0);
        c.leb_exponent = 0.5;
        // Required: c * eps0 / eps^(1/2) = 1 / sqrt(0.25) = 2.
        assert!(make_leb_schedule(&c, 1.0, 0.25, 0.1, 1.0, None).is_err());
        assert!(make_leb_schedule(&c, 1.0, 0.25, 0.1, 2.0, None).is_ok());
    }

    #[test]
    fn running_average_examples() {
        assert_eq!(running_average(&[0.0], &[4.0], 1), vec![4.0]);
        assert_eq!(running_average(&[4.0], &[0.0], 2), vec![2.0]);
        assert_eq!(running_average(&[2.0], &[5.0], 3), vec![3.0]);
    }

    #[test]
    fn running_average_matches_direct_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &len in &[1usize, 2, 17, 1000, 10_000] {
            let points: Vec<Vec<f64>> = (0..len)
                .map(|_| (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let mut avg = vec![0.0; 4];
            for (t, p) in points.iter().enumerate() {
                running_average_in_place(&mut avg, p, (t + 1) as u64);
            }
            let want = direct_mean(&points);
            for (a, w) in avg.iter().zip(&want) {
                let scale = w.abs().max(1.0);
                assert!((a - w).abs() / scale <= 1e-12, "len {len}: {a} vs {w}");
            }
        }
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn running_average_rejects_dimension_mismatch() {
        running_average(&[0.0, 0.0], &[1.0], 1);
    }
}
