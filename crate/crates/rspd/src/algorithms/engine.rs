//! The shared stage engine: projected stochastic primal-dual steps with
//! uniform averaging, trace logging, and budget accounting.

use std::time::Instant;

use crate::data::UniformSampler;
use crate::error::{Error, Result};
use crate::geometry::{
    clamp_interval, dykstra_pair, euclidean_distance, project_intersection, project_l2_ball,
    project_l2_ball_in_place, FeasibleSet,
};
use crate::point::{DualPoint, PrimalPoint};
use crate::problem::SaddleProblem;
use crate::schedule::running_average_in_place;
use crate::trace::{RunTrace, TraceRecord};

use super::{SolverConfig, SolverResult};

/// Projects onto the feasible set, intersected with a stage ball when one
/// is active.
fn project_composed(
    domain: &FeasibleSet,
    ball: Option<(&[f64], f64)>,
    v: &mut Vec<f64>,
) -> Result<()> {
    let Some((center, radius)) = ball else {
        return domain.project_in_place(v);
    };
    match domain {
        FeasibleSet::WholeSpace => {
            if v.len() == 1 {
                // Scalar duals use the interval form of the ball.
                v[0] = clamp_interval(v[0], center[0] - radius, center[0] + radius);
            } else {
                project_l2_ball_in_place(v, center, radius);
            }
            Ok(())
        }
        FeasibleSet::Interval { lo, hi } => {
            v[0] = clamp_interval(v[0], lo.max(center[0] - radius), hi.min(center[0] + radius));
            Ok(())
        }
        FeasibleSet::Simplex { .. } => {
            if domain.contains(v, 0.0) && euclidean_distance(v, center) <= radius {
                return Ok(());
            }
            *v = project_intersection(v, center, radius)?;
            Ok(())
        }
        FeasibleSet::L2Ball { .. } | FeasibleSet::L1Ball { .. } => {
            if domain.contains(v, 0.0) && euclidean_distance(v, center) <= radius {
                return Ok(());
            }
            *v = dykstra_pair(
                v,
                |p| domain.project(p).expect("ball projections cannot fail"),
                |p| project_l2_ball(p, center, radius),
                1e-10,
                1000,
            )?;
            // The stage center is a feasible iterate, so pulling toward it
            // enters the stage ball without leaving the (convex) domain.
            project_l2_ball_in_place(v, center, radius);
            Ok(())
        }
        FeasibleSet::SimplexBall { .. } => Err(Error::Config(
            "stage balls over a simplex/ball intersection domain are not supported".into(),
        )),
    }
}

/// One stage of projected stochastic primal-dual steps, standalone form:
/// runs `iterations` updates from `(x0, y0)` and returns the uniform
/// averages of the iterates seen before each update.
///
/// With `radii = Some((r_x, r_y))` the iterates are confined to
/// `X ∩ B(x0, r_x)` and `Y ∩ B(y0, r_y)`.
#[allow(clippy::too_many_arguments)]
pub fn inner_stage(
    problem: &dyn SaddleProblem,
    x0: &[f64],
    y0: &[f64],
    iterations: u64,
    eta_x: f64,
    eta_y: f64,
    radii: Option<(f64, f64)>,
    sampler: &mut UniformSampler,
) -> Result<(Vec<f64>, Vec<f64>)> {
    assert!(eta_x > 0.0 && eta_y > 0.0, "step sizes must be > 0");
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    if iterations == 0 {
        return Ok((x, y));
    }
    let centers = radii.map(|_| (x.clone(), y.clone()));
    let mut x_avg = vec![0.0; x.len()];
    let mut y_avg = vec![0.0; y.len()];
    let mut gx = vec![0.0; x.len()];
    let mut gy = vec![0.0; y.len()];
    for t in 0..iterations {
        running_average_in_place(&mut x_avg, &x, t + 1);
        running_average_in_place(&mut y_avg, &y, t + 1);
        let index = sampler.next_index();
        problem.stoch_grad(&x, &y, index, &mut gx, &mut gy);
        step_and_project(
            problem, &mut x, &mut y, &gx, &gy, eta_x, eta_y, radii, &centers,
        )?;
    }
    Ok((x_avg, y_avg))
}

#[allow(clippy::too_many_arguments)]
fn step_and_project(
    problem: &dyn SaddleProblem,
    x: &mut Vec<f64>,
    y: &mut Vec<f64>,
    gx: &[f64],
    gy: &[f64],
    eta_x: f64,
    eta_y: f64,
    radii: Option<(f64, f64)>,
    centers: &Option<(Vec<f64>, Vec<f64>)>,
) -> Result<()> {
    for (xi, g) in x.iter_mut().zip(gx) {
        *xi -= eta_x * g;
    }
    for (yi, g) in y.iter_mut().zip(gy) {
        *yi += eta_y * g;
    }
    let (ball_x, ball_y) = match (radii, centers) {
        (Some((rx, ry)), Some((cx, cy))) => (Some((cx.as_slice(), rx)), Some((cy.as_slice(), ry))),
        _ => (None, None),
    };
    project_composed(problem.primal_domain(), ball_x, x)?;
    project_composed(problem.dual_domain(), ball_y, y)?;
    Ok(())
}

/// Drives a full solver run: owns the iterates, sampler, budget, and trace.
pub(super) struct Driver<'a> {
    problem: &'a dyn SaddleProblem,
    sampler: UniformSampler,
    x: Vec<f64>,
    y: Vec<f64>,
    gradients: u64,
    budget: Option<u64>,
    started: Instant,
    record_wall: bool,
    eval_metric: bool,
    feasibility_checks: bool,
    log_interval: Option<u64>,
    trace: RunTrace,
    stages_completed: usize,
}

impl<'a> Driver<'a> {
    pub(super) fn new(problem: &'a dyn SaddleProblem, config: &SolverConfig) -> Self {
        let x = problem.start_point();
        let y = problem.best_response(&x);
        Driver {
            problem,
            sampler: UniformSampler::new(problem.sample_count(), config.seed),
            x,
            y,
            gradients: 0,
            budget: config.budget,
            started: Instant::now(),
            record_wall: config.record_wall_time,
            eval_metric: config.eval_metric,
            feasibility_checks: config.feasibility_checks,
            log_interval: config.log_interval,
            trace: RunTrace::new(),
            stages_completed: 0,
        }
    }

    pub(super) fn initial_record(&mut self) {
        let x = self.x.clone();
        self.record(0, None, &x);
    }

    fn record(&mut self, stage: u32, restart: Option<u32>, at: &[f64]) {
        let objective = self.problem.primal_objective(at);
        let metric = if self.eval_metric {
            self.problem.metric(at)
        } else {
            None
        };
        let wall_seconds = if self.record_wall {
            self.started.elapsed().as_secs_f64()
        } else {
            0.0
        };
        self.trace.push(TraceRecord {
            gradients_used: self.gradients,
            wall_seconds,
            objective,
            metric,
            stage,
            restart_index: restart,
        });
    }

    fn budget_exhausted(&self) -> bool {
        self.budget.is_some_and(|b| self.gradients >= b)
    }

    fn assert_feasible(&self, radii: Option<(f64, f64)>, centers: &Option<(Vec<f64>, Vec<f64>)>) {
        const TOL: f64 = 1e-10;
        assert!(
            self.problem.primal_domain().contains(&self.x, TOL),
            "primal iterate left its domain"
        );
        assert!(
            self.problem.dual_domain().contains(&self.y, TOL),
            "dual iterate left its domain"
        );
        if let (Some((rx, ry)), Some((cx, cy))) = (radii, centers) {
            assert!(
                euclidean_distance(&self.x, cx) <= rx + TOL,
                "primal iterate left its ball"
            );
            assert!(
                euclidean_distance(&self.y, cy) <= ry + TOL,
                "dual iterate left its ball"
            );
        }
    }

    /// Runs one stage; returns false when the budget ran out before the
    /// stage completed. On exit the driver is re-centered on the stage
    /// average, with the dual restarted at the best response when
    /// `restart_dual` is set (and at the dual average otherwise).
    #[allow(clippy::too_many_arguments)]
    pub(super) fn run_stage(
        &mut self,
        stage: u32,
        restart: Option<u32>,
        eta_x: f64,
        eta_y: f64,
        iterations: u64,
        radii: Option<(f64, f64)>,
        restart_dual: bool,
    ) -> Result<bool> {
        let centers = radii.map(|_| (self.x.clone(), self.y.clone()));
        let mut x_avg = vec![0.0; self.x.len()];
        let mut y_avg = vec![0.0; self.y.len()];
        let mut gx = vec![0.0; self.x.len()];
        let mut gy = vec![0.0; self.y.len()];
        let log_every = self.log_interval.unwrap_or((iterations / 50).max(1));
        let mut steps = 0u64;
        for t in 0..iterations {
            if self.budget_exhausted() {
                break;
            }
            running_average_in_place(&mut x_avg, &self.x, t + 1);
            running_average_in_place(&mut y_avg, &self.y, t + 1);
            let index = self.sampler.next_index();
            self.problem
                .stoch_grad(&self.x, &self.y, index, &mut gx, &mut gy);
            self.gradients += 1;
            step_and_project(
                self.problem,
                &mut self.x,
                &mut self.y,
                &gx,
                &gy,
                eta_x,
                eta_y,
                radii,
                &centers,
            )?;
            steps = t + 1;
            if steps.is_multiple_of(log_every) && steps < iterations {
                if self.x.iter().any(|v| !v.is_finite()) || self.y.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Numerical {
                        what: format!("iterates diverged after {} gradients", self.gradients),
                        residual: f64::INFINITY,
                    });
                }
                if self.feasibility_checks {
                    self.assert_feasible(radii, &centers);
                }
                self.record(stage, restart, &x_avg);
            }
        }
        if steps == 0 {
            return Ok(!self.budget_exhausted());
        }
        if x_avg.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                what: format!("iterates diverged after {} gradients", self.gradients),
                residual: f64::INFINITY,
            });
        }
        // Restart: re-center on the averaged iterates.
        self.x = x_avg;
        self.y = if restart_dual {
            self.problem.best_response(&self.x)
        } else {
            y_avg
        };
        if self.feasibility_checks {
            self.assert_feasible(radii, &centers);
        }
        let x = self.x.clone();
        self.record(stage, restart, &x);
        let completed = steps == iterations;
        if completed {
            self.stages_completed += 1;
        }
        Ok(completed)
    }

    pub(super) fn finish(self) -> SolverResult {
        SolverResult {
            final_primal: PrimalPoint::new(self.x).expect("iterates stay finite"),
            final_dual: DualPoint::new(self.y).expect("iterates stay finite"),
            trace: self.trace,
            stages_completed: self.stages_completed,
            gradients_total: self.gradients,
        }
    }
}
