//! The solvers: a fixed-step stochastic primal-dual baseline and three
//! restarted variants.
//!
//! All four share the same inner update
//!
//! `x_{t+1} = proj_X(x_t - eta_x gx)`, `y_{t+1} = proj_Y(y_t + eta_y gy)`
//!
//! and average the iterates seen *before* each update. The restarted
//! solvers re-center on the stage average, recompute the dual best response
//! there, and halve the step sizes; they differ in whether the stage length
//! doubles (strongly convex mode) or the iterates are confined to shrinking
//! balls at constant stage length (error-bound mode). The adaptive variant
//! repeats the error-bound solver with a growing radius and stage length so
//! no error-bound constant needs to be known up front.

mod engine;

pub use engine::inner_stage;

use crate::error::{Error, Result};
use crate::point::{DualPoint, PrimalPoint};
use crate::problem::SaddleProblem;
use crate::schedule::{make_leb_schedule, make_sc_schedule, stage_count, Stage};
use crate::trace::RunTrace;

use engine::Driver;

/// Configuration shared by the solvers. Fields not used by a given solver
/// are ignored by it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub seed: u64,
    /// Bound on the initial objective gap; see
    /// [`crate::problem::default_eps0`].
    pub eps0: f64,
    /// Target accuracy; must be below `eps0`.
    pub eps_target: f64,
    /// Failure probability budget of the error-bound schedule.
    pub delta: f64,
    /// Overrides the derived stage count.
    pub stage_override: Option<usize>,
    /// Overrides the derived per-stage iteration count.
    pub iterations_override: Option<u64>,
    /// Initial primal ball radius for the error-bound solvers.
    pub initial_radius: Option<f64>,
    /// Shrink factor applied to the adaptive solver's gap bound per call.
    pub kappa: f64,
    /// Caps the adaptive solver's outer calls.
    pub max_restarts: Option<usize>,
    /// Log every this many inner iterations; default is a 50th of the stage.
    pub log_interval: Option<u64>,
    /// Stops the run after this many stochastic gradients.
    pub budget: Option<u64>,
    /// Overrides the first-stage primal step size.
    pub eta_x1: Option<f64>,
    /// Overrides the first-stage dual step size.
    pub eta_y1: Option<f64>,
    /// Record monotonic wall-clock seconds in the trace. Disable for
    /// byte-reproducible traces.
    pub record_wall_time: bool,
    /// Evaluate the problem's task metric at log points.
    pub eval_metric: bool,
    /// Assert domain membership of the iterates at log points (test aid).
    pub feasibility_checks: bool,
}

impl SolverConfig {
    pub fn new(eps0: f64, eps_target: f64) -> Self {
        SolverConfig {
            seed: 0,
            eps0,
            eps_target,
            delta: 0.05,
            stage_override: None,
            iterations_override: None,
            initial_radius: None,
            kappa: 1.0,
            max_restarts: None,
            log_interval: None,
            budget: None,
            eta_x1: None,
            eta_y1: None,
            record_wall_time: true,
            eval_metric: true,
            feasibility_checks: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(Error::Config(format!(
                "eps0 must be finite and > 0, got {}",
                self.eps0
            )));
        }
        if !(self.eps_target > 0.0) || self.eps_target >= self.eps0 {
            return Err(Error::InvalidAccuracy(format!(
                "eps_target must lie in (0, eps0), got {} with eps0 {}",
                self.eps_target, self.eps0
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::Config(format!(
                "kappa must lie in (0, 1], got {}",
                self.kappa
            )));
        }
        if self.log_interval == Some(0) {
            return Err(Error::Config("log_interval must be >= 1".into()));
        }
        if let Some(s) = self.stage_override {
            if s == 0 {
                return Err(Error::Config("stage override must be >= 1".into()));
            }
        }
        if let Some(t) = self.iterations_override {
            if t == 0 {
                return Err(Error::Config("iteration override must be >= 1".into()));
            }
        }
        for (name, value) in [
            ("initial_radius", self.initial_radius),
            ("eta_x1", self.eta_x1),
            ("eta_y1", self.eta_y1),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!(
                        "{name} must be finite and > 0, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn stages(&self) -> Result<usize> {
        match self.stage_override {
            Some(s) => Ok(s),
            None => stage_count(self.eps0, self.eps_target),
        }
    }

    /// Target accuracy implied by the stage override, if any.
    fn effective_target(&self) -> Result<f64> {
        Ok(self.eps0 * 0.5f64.powi(self.stages()? as i32))
    }
}

/// What a solver run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub final_primal: PrimalPoint,
    pub final_dual: DualPoint,
    pub trace: RunTrace,
    /// Fully completed stages (across all outer calls for the adaptive
    /// solver).
    pub stages_completed: usize,
    /// Stochastic-gradient evaluations consumed.
    pub gradients_total: u64,
}

/// Baseline stochastic primal-dual subgradient method: fixed step sizes, no
/// restarts, uniform averaging. Starts from the problem's default point with
/// the dual best response as `y0`.
pub fn pdsg(
    problem: &dyn SaddleProblem,
    steps: u64,
    eta_x: f64,
    eta_y: f64,
    seed: u64,
) -> Result<SolverResult> {
    let mut config = SolverConfig::new(1.0, 0.5);
    config.seed = seed;
    pdsg_with(problem, steps, eta_x, eta_y, &config)
}

/// Baseline with explicit logging/budget options (only `seed`, `budget`,
/// `log_interval`, and the flags of `config` are consulted).
pub fn pdsg_with(
    problem: &dyn SaddleProblem,
    steps: u64,
    eta_x: f64,
    eta_y: f64,
    config: &SolverConfig,
) -> Result<SolverResult> {
    if !(eta_x > 0.0 && eta_y > 0.0) {
        return Err(Error::Config("step sizes must be > 0".into()));
    }
    let mut driver = Driver::new(problem, config);
    driver.initial_record();
    driver.run_stage(1, None, eta_x, eta_y, steps, None, false)?;
    Ok(driver.finish())
}

/// Restarted solver for strongly convex objectives: per stage the step
/// sizes halve and the iteration count doubles; each restart re-centers on
/// the stage average and recomputes the dual best response there.
pub fn rspd_sc(problem: &dyn SaddleProblem, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let schedule = make_sc_schedule(
        problem.constants(),
        config.eps0,
        config.effective_target()?,
        config.iterations_override,
    )?
    .with_initial_steps(config.eta_x1, config.eta_y1);
    let mut driver = Driver::new(problem, config);
    driver.initial_record();
    for (s, stage) in schedule.stages.iter().enumerate() {
        let done = driver.run_stage(
            (s + 1) as u32,
            None,
            stage.eta_x,
            stage.eta_y,
            stage.iterations,
            None,
            true,
        )?;
        if !done {
            break;
        }
    }
    Ok(driver.finish())
}

/// Restarted solver under a local error bound: constant stage length,
/// halving step sizes, and iterates confined to balls around the stage
/// start points whose radii shrink stage over stage.
pub fn rspd(problem: &dyn SaddleProblem, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let constants = problem.constants();
    let target = config.effective_target()?;
    let r_x1 = match config.initial_radius {
        Some(r) => r,
        None => {
            let c = constants.leb_constant.ok_or_else(|| {
                Error::Config(
                    "initial radius required: provide it or an error-bound constant".into(),
                )
            })?;
            c * config.eps0 / target.powf(1.0 - constants.leb_exponent)
        }
    };
    let schedule = make_leb_schedule(
        constants,
        config.eps0,
        target,
        config.delta,
        r_x1,
        config.iterations_override,
    )?
    .with_initial_steps(config.eta_x1, config.eta_y1);
    let mut driver = Driver::new(problem, config);
    driver.initial_record();
    run_leb_stages(&mut driver, &schedule.stages, None)?;
    Ok(driver.finish())
}

fn run_leb_stages(
    driver: &mut Driver<'_>,
    stages: &[Stage],
    restart_index: Option<u32>,
) -> Result<bool> {
    for (s, stage) in stages.iter().enumerate() {
        let radii = Some((
            stage.radius_x.expect("error-bound stages carry radii"),
            stage.radius_y.expect("error-bound stages carry radii"),
        ));
        let done = driver.run_stage(
            (s + 1) as u32,
            restart_index,
            stage.eta_x,
            stage.eta_y,
            stage.iterations,
            radii,
            true,
        )?;
        if !done {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Adaptive variant: repeated calls of the error-bound solver, each warm
/// started from the previous output, with the radius growing by
/// `2^(1-theta)`, the stage length by `2^(2(1-theta))`, and the gap bound
/// scaled by `kappa` between calls.
pub fn arspd(problem: &dyn SaddleProblem, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let constants = problem.constants();
    let theta = constants.leb_exponent;
    let stages = config.stages()?;
    let r_1 = config
        .initial_radius
        .ok_or_else(|| Error::Config("the adaptive solver requires an initial radius".into()))?;
    let calls = match config.max_restarts {
        Some(k) => k.max(1),
        None => stage_count(config.eps0, config.eps_target)? + 1,
    };

    let m2 = constants.primal_grad_bound * constants.primal_grad_bound;
    let b2 = constants.dual_grad_bound * constants.dual_grad_bound;
    let l2 = constants.holder_constant * constants.holder_constant;
    let g2v = constants
        .loss_lipschitz
        .powf(2.0 * constants.holder_exponent);
    let t_1 = match config.iterations_override {
        Some(t) => t as f64,
        None => {
            let delta_hat = config.delta / (stages * (stages + 1)) as f64;
            let log_term = (1.0 / delta_hat).ln();
            let lead = (320.0 * m2)
                .max(320.0 * b2 * l2 * g2v)
                .max(8192.0 * log_term * m2)
                .max(8192.0 * log_term * b2 * l2 * g2v);
            (lead * (r_1 / config.eps0) * (r_1 / config.eps0))
                .ceil()
                .max(1.0)
        }
    };

    let base_eta_x1 = config.eta_x1.unwrap_or(config.eps0 / (40.0 * m2));
    let base_eta_y1 = config.eta_y1.unwrap_or(config.eps0 / (40.0 * b2));
    let radius_growth = 2.0_f64.powf(1.0 - theta);
    let length_growth = 2.0_f64.powf(2.0 * (1.0 - theta));
    let dual_shrink = 0.5_f64.powf(constants.holder_exponent);

    let mut driver = Driver::new(problem, config);
    driver.initial_record();
    let mut radius = r_1;
    let mut length = t_1;
    let mut eps0_k = config.eps0;
    'outer: for k in 1..=calls {
        let iterations = (length.ceil() as u64).max(1);
        let scale = eps0_k / config.eps0;
        let mut eta_x = base_eta_x1 * scale;
        let mut eta_y = base_eta_y1 * scale;
        let mut radius_x = radius;
        let mut radius_y = constants.holder_constant
            * constants.loss_lipschitz.powf(constants.holder_exponent)
            * radius.powf(constants.holder_exponent);
        for s in 1..=stages {
            let done = driver.run_stage(
                s as u32,
                Some(k as u32),
                eta_x,
                eta_y,
                iterations,
                Some((radius_x, radius_y)),
                true,
            )?;
            if !done {
                break 'outer;
            }
            eta_x *= 0.5;
            eta_y *= 0.5;
            radius_x *= 0.5;
            radius_y *= dual_shrink;
        }
        radius *= radius_growth;
        length *= length_growth;
        eps0_k *= config.kappa;
    }
    Ok(driver.finish())
}
