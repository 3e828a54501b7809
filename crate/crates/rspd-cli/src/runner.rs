//! Builds problems from the declarative spec and drives per-seed solver
//! runs.

use std::sync::Mutex;

use rspd::algorithms::{arspd, pdsg_with, rspd, rspd_sc, SolverConfig, SolverResult};
use rspd::data::{normalize_rows, open_libsvm, NormalizeMode, ParseOptions, SparseDataset};
use rspd::problem::{default_eps0, SaddleProblem};
use rspd::problems::{make_synthetic, AucBall, AucProblem, DroProblem, Regularizer};

use crate::config::{
    BallKind, DatasetSpec, ExperimentConfig, NormalizeSpec, ProblemSpec, RegularizerSpec,
    SolverKind, SolverSpec, TimingMode,
};
use crate::error::CliError;

/// A problem constructed from its spec.
pub struct BuiltProblem {
    pub problem: Box<dyn SaddleProblem>,
    /// Derived default for the initial gap bound.
    pub eps0: f64,
}

fn load_dataset(spec: &DatasetSpec, normalize: NormalizeSpec) -> Result<SparseDataset, CliError> {
    let dataset = match spec {
        DatasetSpec::Path(path) => open_libsvm(path, &ParseOptions::default())
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        DatasetSpec::Synthetic {
            n,
            d,
            nnz,
            seed,
            label_noise,
        } => SparseDataset::synthetic_classification(*n, *d, *nnz, *label_noise, *seed)?,
    };
    Ok(match normalize {
        NormalizeSpec::None => dataset,
        NormalizeSpec::UnitL2 => normalize_rows(&dataset, NormalizeMode::UnitL2),
    })
}

pub fn build_problem(spec: &ProblemSpec) -> Result<BuiltProblem, CliError> {
    let problem: Box<dyn SaddleProblem> = match spec {
        ProblemSpec::Dro {
            dataset,
            lambda1,
            lambda2,
            regularizer,
            normalize,
            grad_bounds,
        } => {
            let data = load_dataset(dataset, *normalize)?;
            let n = data.len() as f64;
            let reg = match regularizer {
                RegularizerSpec::L2Squared => Regularizer::L2Squared,
                RegularizerSpec::L1 => Regularizer::L1,
            };
            let mut p = DroProblem::new(
                data,
                lambda1.unwrap_or(1.0 / n),
                lambda2.unwrap_or(1.0 / n),
                reg,
            )?;
            if let Some((m, b)) = grad_bounds {
                p = p.with_grad_bounds(*m, *b);
            }
            Box::new(p)
        }
        ProblemSpec::Auc {
            dataset,
            ball,
            lambda_reg,
            test_fraction,
            normalize,
            grad_bounds,
        } => {
            let data = load_dataset(dataset, *normalize)?;
            let auc_ball = match ball.kind {
                BallKind::L2 => AucBall::L2 {
                    radius: ball.radius,
                },
                BallKind::L1 => AucBall::L1 {
                    radius: ball.radius,
                },
            };
            let (train, test) = match test_fraction {
                Some(f) => {
                    let (train, test) = data.split_ratio(1.0 - f, 0x7e57)?;
                    (train, Some(test))
                }
                None => (data, None),
            };
            let mut p = AucProblem::new(train, auc_ball, *lambda_reg)?;
            if let Some(test) = test {
                p = p.with_test_split(test)?;
            }
            if let Some((m, b)) = grad_bounds {
                p = p.with_grad_bounds(*m, *b);
            }
            Box::new(p)
        }
        ProblemSpec::Synthetic {
            n,
            d,
            mu,
            lambda_dual,
            problem_seed,
        } => Box::new(make_synthetic(*n, *d, *mu, *lambda_dual, *problem_seed)),
    };
    let eps0 = default_eps0(problem.as_ref());
    Ok(BuiltProblem { problem, eps0 })
}

/// Maps the declarative solver spec onto a [`SolverConfig`] for one seed.
pub fn solver_config(
    spec: &SolverSpec,
    eps0_default: f64,
    seed: u64,
    budget: u64,
    timing: TimingMode,
) -> SolverConfig {
    let eps0 = spec.eps0.unwrap_or(eps0_default);
    let eps_target = spec.eps_target.unwrap_or(eps0 / 1024.0);
    let mut config = SolverConfig::new(eps0, eps_target);
    config.seed = seed;
    config.delta = spec.delta;
    config.stage_override = spec.stages;
    config.iterations_override = spec.iterations;
    config.initial_radius = spec.initial_radius;
    config.kappa = spec.kappa;
    config.max_restarts = spec.max_restarts;
    config.log_interval = spec.log_interval;
    config.budget = Some(budget);
    config.eta_x1 = spec.eta_x;
    config.eta_y1 = spec.eta_y;
    config.record_wall_time = timing == TimingMode::Wall;
    config
}

pub fn dispatch(
    problem: &dyn SaddleProblem,
    kind: SolverKind,
    config: &SolverConfig,
) -> Result<SolverResult, CliError> {
    let result = match kind {
        SolverKind::Pdsg => {
            let steps = config.budget.expect("runner always sets a budget");
            let eta_x = config.eta_x1.expect("validated: baseline has a step size");
            let eta_y = config.eta_y1.unwrap_or(eta_x);
            pdsg_with(problem, steps, eta_x, eta_y, config)
        }
        SolverKind::RspdSc => rspd_sc(problem, config),
        SolverKind::Rspd => rspd(problem, config),
        SolverKind::Arspd => arspd(problem, config),
    }?;
    Ok(result)
}

/// Runs one solver per seed over the shared immutable problem; seeds run
/// concurrently and results come back in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<(u64, SolverResult)>, CliError> {
    let built = build_problem(&config.problem)?;
    run_seeds(
        &config.seeds,
        built.problem.as_ref(),
        |seed| {
            solver_config(
                &config.solver,
                built.eps0,
                seed,
                config.budget,
                config.timing,
            )
        },
        config.solver.kind,
    )
}

pub fn run_seeds(
    seeds: &[u64],
    problem: &dyn SaddleProblem,
    make_config: impl Fn(u64) -> SolverConfig + Sync,
    kind: SolverKind,
) -> Result<Vec<(u64, SolverResult)>, CliError> {
    let slots: Vec<Mutex<Option<Result<SolverResult, CliError>>>> =
        seeds.iter().map(|_| Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(seeds.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let config = make_config(seeds[i]);
                let result = dispatch(problem, kind, &config);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    let mut out = Vec::with_capacity(seeds.len());
    for (seed, slot) in seeds.iter().zip(slots) {
        let result = slot
            .into_inner()
            .unwrap()
            .expect("worker filled every slot")?;
        out.push((*seed, result));
    }
    Ok(out)
}
