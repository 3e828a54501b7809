//! Initial-step-size tuning over the decade grid `1e-5 .. 1e3`, selecting
//! by the best median final objective. Tuning traces are written under a
//! labeled `sweep/` subdirectory so comparison plots can exclude them.

use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::csv::write_trace_csv;
use crate::error::CliError;
use crate::pstar::estimate_pstar;
use crate::runner::{build_problem, run_seeds, solver_config};

/// The decade exponents of the tuning grid.
pub const GRID_EXPONENTS: std::ops::RangeInclusive<i32> = -5..=3;

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub eta: f64,
    pub label: String,
    pub median_final_objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub best: SweepEntry,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn run_sweep(config: &ExperimentConfig, outputs: &Path) -> Result<SweepReport, CliError> {
    let built = build_problem(&config.problem)?;
    let pstar = estimate_pstar(config, built.problem.as_ref(), outputs)?;
    let mut entries = Vec::new();
    for exp in GRID_EXPONENTS {
        let eta = 10f64.powi(exp);
        let label = format!("1e{exp}");
        let mut spec = config.solver.clone();
        spec.eta_x = Some(eta);
        spec.eta_y = Some(eta);
        let results = run_seeds(
            &config.seeds,
            built.problem.as_ref(),
            |seed| solver_config(&spec, built.eps0, seed, config.budget, config.timing),
            spec.kind,
        );
        // A step size that makes the iterates diverge scores worst instead
        // of aborting the whole sweep.
        let entry = match results {
            Ok(results) => {
                let dir = outputs.join("sweep").join(format!("eta_{label}"));
                write_trace_csv(&results, pstar.value, &dir)?;
                let mut finals: Vec<f64> = results
                    .iter()
                    .map(|(_, r)| {
                        r.trace
                            .last()
                            .map(|rec| rec.objective)
                            .unwrap_or(f64::INFINITY)
                    })
                    .collect();
                SweepEntry {
                    eta,
                    label,
                    median_final_objective: median(&mut finals),
                }
            }
            Err(CliError::Numerical(_)) => SweepEntry {
                eta,
                label,
                median_final_objective: f64::INFINITY,
            },
            Err(other) => return Err(other),
        };
        entries.push(entry);
    }
    let best = entries
        .iter()
        .min_by(|a, b| {
            a.median_final_objective
                .partial_cmp(&b.median_final_objective)
                .expect("objectives are comparable")
        })
        .expect("grid is nonempty")
        .clone();
    let report = SweepReport { entries, best };
    let summary_path = outputs.join("sweep").join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&report).expect("serializable"),
    )
    .map_err(|e| CliError::Io(format!("writing {}: {e}", summary_path.display())))?;
    Ok(report)
}
