//! Declarative experiment configuration (JSON) and its total validation:
//! an invalid config reports every violated field at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub seeds: Vec<u64>,
    /// Maximum stochastic gradients per run. Zero is allowed and leaves only
    /// the initial trace record.
    pub budget: u64,
    pub outputs: PathBuf,
    #[serde(default)]
    pub timing: TimingMode,
    #[serde(default)]
    pub pstar: PStarSpec,
}

/// Whether traces carry wall-clock seconds. `None` zeroes the column so
/// repeated runs are byte-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    #[default]
    Wall,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Dro {
        dataset: DatasetSpec,
        /// Divergence weight; defaults to 1/n.
        lambda1: Option<f64>,
        /// Regularizer weight; defaults to 1/n.
        lambda2: Option<f64>,
        #[serde(default)]
        regularizer: RegularizerSpec,
        #[serde(default)]
        normalize: NormalizeSpec,
        /// Override for the (primal, dual) gradient-norm bounds; when absent
        /// they are estimated from 1000 random probes.
        grad_bounds: Option<(f64, f64)>,
    },
    Auc {
        dataset: DatasetSpec,
        ball: BallSpec,
        #[serde(default)]
        lambda_reg: f64,
        /// Held-out fraction used for the test-AUC metric.
        test_fraction: Option<f64>,
        #[serde(default)]
        normalize: NormalizeSpec,
        grad_bounds: Option<(f64, f64)>,
    },
    Synthetic {
        n: usize,
        d: usize,
        mu: f64,
        lambda_dual: f64,
        #[serde(default)]
        problem_seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A libsvm text file; `.gz` is decompressed transparently.
    Path(PathBuf),
    /// Generated sparse classification data.
    Synthetic {
        n: usize,
        d: usize,
        nnz: usize,
        seed: u64,
        #[serde(default)]
        label_noise: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerSpec {
    #[default]
    L2Squared,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeSpec {
    #[default]
    None,
    UnitL2,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub kind: BallKind,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    L2,
    L1,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub kind: SolverKind,
    /// Initial gap bound; defaults to the problem's derived value.
    pub eps0: Option<f64>,
    /// Target accuracy; defaults to `eps0 / 2^10`.
    pub eps_target: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub stages: Option<usize>,
    pub iterations: Option<u64>,
    pub initial_radius: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub max_restarts: Option<usize>,
    pub log_interval: Option<u64>,
    /// Primal step size: fixed for the baseline, first-stage for the
    /// restarted solvers.
    pub eta_x: Option<f64>,
    /// Dual step size, same convention.
    pub eta_y: Option<f64>,
}

fn default_delta() -> f64 {
    0.05
}

fn default_kappa() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Pdsg,
    RspdSc,
    Rspd,
    Arspd,
}

/// How the optimal-value reference for gap columns is obtained.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PStarSpec {
    #[serde(default)]
    pub mode: PStarMode,
    /// Gradient budget of the reference run; defaults to 10x the experiment
    /// budget.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PStarMode {
    /// Analytic when the problem provides one, otherwise a long run.
    #[default]
    Auto,
    Analytic,
    LongRun,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(vec![e.to_string()]))?;
    validate(&config)?;
    Ok(config)
}

/// Collects every field-level violation before failing.
pub fn validate(config: &ExperimentConfig) -> Result<(), CliError> {
    let mut violations = Vec::new();
    if config.seeds.is_empty() {
        violations.push("seeds: at least one seed is required".to_string());
    }
    match &config.problem {
        ProblemSpec::Dro {
            dataset,
            lambda1,
            lambda2,
            ..
        } => {
            validate_dataset(dataset, &mut violations);
            for (name, value) in [("lambda1", lambda1), ("lambda2", lambda2)] {
                if let Some(v) = value {
                    if !(*v > 0.0 && v.is_finite()) {
                        violations.push(format!("problem.{name}: must be finite and > 0, got {v}"));
                    }
                }
            }
        }
        ProblemSpec::Auc {
            dataset,
            ball,
            lambda_reg,
            test_fraction,
            ..
        } => {
            validate_dataset(dataset, &mut violations);
            if !(ball.radius > 0.0 && ball.radius.is_finite()) {
                violations.push(format!(
                    "problem.ball.radius: must be finite and > 0, got {}",
                    ball.radius
                ));
            }
            if !(*lambda_reg >= 0.0) {
                violations.push(format!(
                    "problem.lambda_reg: must be >= 0, got {lambda_reg}"
                ));
            }
            if let Some(f) = test_fraction {
                if !(*f > 0.0 && *f < 1.0) {
                    violations.push(format!(
                        "problem.test_fraction: must lie in (0, 1), got {f}"
                    ));
                }
            }
        }
        ProblemSpec::Synthetic {
            n,
            d,
            mu,
            lambda_dual,
            ..
        } => {
            if *n == 0 {
                violations.push("problem.n: must be >= 1".to_string());
            }
            if *d == 0 {
                violations.push("problem.d: must be >= 1".to_string());
            }
            if !(*mu > 0.0) {
                violations.push(format!("problem.mu: must be > 0, got {mu}"));
            }
            if !(*lambda_dual > 0.0) {
                violations.push(format!(
                    "problem.lambda_dual: must be > 0, got {lambda_dual}"
                ));
            }
        }
    }
    let solver = &config.solver;
    if let Some(eps0) = solver.eps0 {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            violations.push(format!("solver.eps0: must be finite and > 0, got {eps0}"));
        }
        if let Some(t) = solver.eps_target {
            if !(t > 0.0 && t < eps0) {
                violations.push(format!("solver.eps_target: must lie in (0, eps0), got {t}"));
            }
        }
    }
    if !(solver.delta > 0.0 && solver.delta < 1.0) {
        violations.push(format!(
            "solver.delta: must lie in (0, 1), got {}",
            solver.delta
        ));
    }
    if !(solver.kappa > 0.0 && solver.kappa <= 1.0) {
        violations.push(format!(
            "solver.kappa: must lie in (0, 1], got {}",
            solver.kappa
        ));
    }
    if solver.log_interval == Some(0) {
        violations.push("solver.log_interval: must be >= 1".to_string());
    }
    if solver.stages == Some(0) {
        violations.push("solver.stages: must be >= 1".to_string());
    }
    if solver.iterations == Some(0) {
        violations.push("solver.iterations: must be >= 1".to_string());
    }
    for (name, value) in [
        ("initial_radius", solver.initial_radius),
        ("eta_x", solver.eta_x),
        ("eta_y", solver.eta_y),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                violations.push(format!("solver.{name}: must be finite and > 0, got {v}"));
            }
        }
    }
    if solver.kind == SolverKind::Pdsg && solver.eta_x.is_none() {
        violations.push("solver.eta_x: the baseline needs a fixed step size".to_string());
    }
    if let Some(b) = config.pstar.budget {
        if config.pstar.mode == PStarMode::LongRun && b < 100_000 {
            violations.push(format!(
                "pstar.budget: long-run estimation needs >= 1e5, got {b}"
            ));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(violations))
    }
}

fn validate_dataset(dataset: &DatasetSpec, violations: &mut Vec<String>) {
    match dataset {
        DatasetSpec::Path(path) => {
            if !path.exists() {
                violations.push(format!(
                    "problem.dataset.path: {} does not exist",
                    path.display()
                ));
            }
        }
        DatasetSpec::Synthetic { n, d, nnz, .. } => {
            if *n == 0 || *d == 0 || *nnz == 0 || nnz > d {
                violations.push(format!(
                    "problem.dataset.synthetic: invalid shape n={n}, d={d}, nnz={nnz}"
                ));
            }
        }
    }
}

/// Output directory, rooted at `RSPD_OUT` when set and the configured path
/// is relative.
pub fn resolve_outputs(config: &ExperimentConfig) -> PathBuf {
    match std::env::var_os("RSPD_OUT") {
        Some(root) if config.outputs.is_relative() => PathBuf::from(root).join(&config.outputs),
        _ => config.outputs.clone(),
    }
}
