//! Harness-level behavior: total config validation, CSV round trips, plot
//! determinism, and the optimal-value cache.

use rspd_cli::config::{validate, ExperimentConfig};
use rspd_cli::csv::{read_trace_csv, write_trace_csv, CSV_HEADER};
use rspd_cli::error::CliError;
use rspd_cli::plot::{decade_ticks, emit_plot, XColumn, YColumn};
use rspd_cli::pstar::estimate_pstar;
use rspd_cli::runner::{build_problem, run_experiment};

fn parse_config(json: &str) -> ExperimentConfig {
    serde_json::from_str(json).expect("config parses")
}

fn synthetic_config(outputs: &std::path::Path) -> ExperimentConfig {
    parse_config(&format!(
        r#"{{
            "problem": {{"kind": "synthetic", "n": 6, "d": 3, "mu": 1.0, "lambda_dual": 1.0, "problem_seed": 7}},
            "solver": {{"kind": "rspd_sc", "stages": 3, "iterations": 2000}},
            "seeds": [11, 12],
            "budget": 50000,
            "outputs": {:?},
            "timing": "none"
        }}"#,
        outputs.display()
    ))
}

#[test]
fn validation_reports_every_violation_at_once() {
    let config = parse_config(
        r#"{
            "problem": {"kind": "synthetic", "n": 0, "d": 0, "mu": -1.0, "lambda_dual": 1.0},
            "solver": {"kind": "pdsg", "delta": 2.0, "kappa": 0.0, "log_interval": 0},
            "seeds": [],
            "budget": 10,
            "outputs": "out"
        }"#,
    );
    let err = validate(&config).unwrap_err();
    match err {
        CliError::Config(violations) => {
            let text = violations.join("\n");
            for needle in [
                "seeds",
                "problem.n",
                "problem.d",
                "problem.mu",
                "solver.delta",
                "solver.kappa",
                "solver.log_interval",
                "solver.eta_x",
            ] {
                assert!(
                    text.contains(needle),
                    "missing violation for {needle}: {text}"
                );
            }
            assert!(violations.len() >= 8);
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let result: Result<ExperimentConfig, _> = serde_json::from_str(
        r#"{
            "problem": {"kind": "synthetic", "n": 2, "d": 2, "mu": 1.0, "lambda_dual": 1.0},
            "solver": {"kind": "pdsg", "eta_x": 0.1},
            "seeds": [1],
            "budget": 10,
            "outputs": "out",
            "typo_field": 3
        }"#,
    );
    assert!(result.is_err());
}

#[test]
fn csv_round_trip_reproduces_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let results = run_experiment(&config).unwrap();
    let built = build_problem(&config.problem).unwrap();
    let pstar = built.problem.optimal_value().unwrap();
    let paths = write_trace_csv(&results, pstar, dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    for ((_, result), path) in results.iter().zip(&paths) {
        let parsed = read_trace_csv(path).unwrap();
        assert_eq!(parsed.len(), result.trace.len());
        for (row, record) in parsed.iter().zip(result.trace.records()) {
            assert_eq!(&row.to_trace_record(), record);
            assert_eq!(row.gap, record.objective - pstar);
        }
    }
}

#[test]
fn empty_trace_yields_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = synthetic_config(dir.path());
    config.budget = 0;
    let results = run_experiment(&config).unwrap();
    // Budget zero leaves only the initial record.
    assert!(results.iter().all(|(_, r)| r.trace.len() == 1));
    let paths = write_trace_csv(&results, 0.0, dir.path()).unwrap();
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
}

#[test]
fn row_count_is_record_count_plus_header() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let results = run_experiment(&config).unwrap();
    let paths = write_trace_csv(&results, 0.4, dir.path()).unwrap();
    for ((_, result), path) in results.iter().zip(&paths) {
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), result.trace.len() + 1);
    }
}

#[test]
fn plots_are_byte_deterministic_and_contain_series_paths() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let results = run_experiment(&config).unwrap();
    let paths = write_trace_csv(&results, 0.4, dir.path()).unwrap();
    let out_a = dir.path().join("a.svg");
    let out_b = dir.path().join("b.svg");
    let svg_a = emit_plot(&paths, XColumn::Gradients, YColumn::Gap, &out_a).unwrap();
    let svg_b = emit_plot(&paths, XColumn::Gradients, YColumn::Gap, &out_b).unwrap();
    assert_eq!(svg_a, svg_b);
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
    assert!(svg_a.matches("<path d=\"M ").count() >= 2);
}

#[test]
fn constant_series_draws_a_horizontal_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("constant.csv");
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for i in 0..5u64 {
        text.push_str(&format!("{},0e0,5e-1,2.5e-1,,1,\n", i * 10));
    }
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("c.svg");
    let svg = emit_plot(&[path], XColumn::Gradients, YColumn::Gap, &out).unwrap();
    let d_start = svg.find("<path d=\"").expect("a series path exists") + "<path d=\"".len();
    let d_end = svg[d_start..].find('"').unwrap() + d_start;
    let path_fragment = &svg[d_start..d_end];
    // All y coordinates identical: a horizontal line.
    let ys: Vec<&str> = path_fragment
        .split(['M', 'L'])
        .skip(1)
        .map(|pair| pair.trim().split(' ').nth(1).unwrap())
        .collect();
    assert!(ys.len() >= 2);
    assert!(ys.iter().all(|y| y == &ys[0]), "{ys:?}");
}

#[test]
fn decade_ticks_match_reference_enumeration() {
    assert_eq!(decade_ticks(1e-4, 1.0), vec![-4, -3, -2, -1, 0]);
    assert_eq!(decade_ticks(2e-4, 0.5), vec![-3, -2, -1]);
    assert_eq!(decade_ticks(0.2, 0.4), vec![-1, 0]);
    // Reference enumerator: every k with 10^k inside [lo, hi].
    let reference = |lo: f64, hi: f64| -> Vec<i32> {
        (-20..=20)
            .filter(|&k| 10f64.powi(k) >= lo * (1.0 - 1e-12) && 10f64.powi(k) <= hi * (1.0 + 1e-12))
            .collect()
    };
    for (lo, hi) in [(1e-4, 1.0), (3e-7, 2e-2), (0.5, 1234.0)] {
        assert_eq!(decade_ticks(lo, hi), reference(lo, hi), "at ({lo}, {hi})");
    }
}

#[test]
fn pstar_cache_returns_identical_estimate_without_new_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let built = build_problem(&config.problem).unwrap();
    let first = estimate_pstar(&config, built.problem.as_ref(), dir.path()).unwrap();
    let second = estimate_pstar(&config, built.problem.as_ref(), dir.path()).unwrap();
    assert_eq!(first, second);
    assert_eq!(
        first.gradients_spent, 0,
        "synthetic problems have an analytic optimum"
    );
    assert_eq!(first.method, rspd_cli::pstar::PStarMethod::Analytic);
}

#[test]
fn pstar_long_run_estimate_is_monotone_in_budget() {
    // The minimum-so-far of a deterministic run only improves with budget.
    let dro_json = |budget: u64, outputs: &std::path::Path| {
        parse_config(&format!(
            r#"{{
                "problem": {{"kind": "dro",
                             "dataset": {{"synthetic": {{"n": 80, "d": 12, "nnz": 6, "seed": 3}}}},
                             "lambda1": null, "lambda2": null, "grad_bounds": [20.0, 90.0]}},
                "solver": {{"kind": "rspd_sc", "stages": 3}},
                "seeds": [1],
                "budget": 1000,
                "outputs": {:?},
                "pstar": {{"mode": "long_run", "budget": {budget}}}
            }}"#,
            outputs.display()
        ))
    };
    let mut previous = f64::INFINITY;
    for budget in [100_000u64, 200_000, 400_000] {
        let dir = tempfile::tempdir().unwrap();
        let config = dro_json(budget, dir.path());
        let built = build_problem(&config.problem).unwrap();
        let estimate = estimate_pstar(&config, built.problem.as_ref(), dir.path()).unwrap();
        assert!(
            estimate.value <= previous + 1e-12,
            "estimate got worse with more budget: {previous} -> {}",
            estimate.value
        );
        previous = estimate.value;
    }
}

#[test]
fn analytic_gap_column_is_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let built = build_problem(&config.problem).unwrap();
    let pstar = estimate_pstar(&config, built.problem.as_ref(), dir.path()).unwrap();
    assert_eq!(pstar.method, rspd_cli::pstar::PStarMethod::Analytic);
    let results = run_experiment(&config).unwrap();
    let paths = write_trace_csv(&results, pstar.value, dir.path()).unwrap();
    for path in &paths {
        for row in read_trace_csv(path).unwrap() {
            assert!(
                row.gap >= -1e-9,
                "gap {} below -1e-9 in {}",
                row.gap,
                path.display()
            );
        }
    }
}

#[test]
fn output_root_env_var_roots_relative_paths() {
    let config = parse_config(
        r#"{
            "problem": {"kind": "synthetic", "n": 2, "d": 2, "mu": 1.0, "lambda_dual": 1.0},
            "solver": {"kind": "rspd_sc"},
            "seeds": [1],
            "budget": 10,
            "outputs": "nested/run1"
        }"#,
    );
    // Relative paths are rooted at RSPD_OUT when it is set.
    std::env::set_var("RSPD_OUT", "/tmp/rspd-oot-test");
    let resolved = rspd_cli::resolve_outputs(&config);
    std::env::remove_var("RSPD_OUT");
    assert_eq!(
        resolved,
        std::path::Path::new("/tmp/rspd-oot-test/nested/run1")
    );
    assert_eq!(
        rspd_cli::resolve_outputs(&config),
        std::path::Path::new("nested/run1")
    );
}

#[test]
fn two_seeds_share_schedule_but_differ_in_iterates() {
    let dir = tempfile::tempdir().unwrap();
    let config = synthetic_config(dir.path());
    let results = run_experiment(&config).unwrap();
    let (a, b) = (&results[0].1, &results[1].1);
    assert_eq!(a.gradients_total, b.gradients_total);
    assert_eq!(a.stages_completed, b.stages_completed);
    assert_ne!(a.final_primal, b.final_primal);
}

#[test]
fn dataset_paths_are_checked_up_front() {
    let config = parse_config(
        r#"{
            "problem": {"kind": "dro", "dataset": {"path": "/nonexistent/data.libsvm"},
                        "lambda1": null, "lambda2": null, "grad_bounds": null},
            "solver": {"kind": "rspd_sc"},
            "seeds": [1],
            "budget": 100,
            "outputs": "out"
        }"#,
    );
    let err = validate(&config).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("does not exist"));
}

#[test]
fn auc_runs_report_a_metric_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = parse_config(&format!(
        r#"{{
            "problem": {{"kind": "auc",
                         "dataset": {{"synthetic": {{"n": 300, "d": 10, "nnz": 5, "seed": 5}}}},
                         "ball": {{"kind": "l2", "radius": 10.0}},
                         "lambda_reg": 0.0001,
                         "test_fraction": 0.25,
                         "grad_bounds": null}},
            "solver": {{"kind": "arspd", "stages": 3, "iterations": 400, "initial_radius": 2.0, "max_restarts": 3}},
            "seeds": [4],
            "budget": 20000,
            "outputs": {:?},
            "timing": "none",
            "pstar": {{"mode": "long_run", "budget": 100000}}
        }}"#,
        dir.path().display()
    ));
    let results = run_experiment(&config).unwrap();
    let (_, result) = &results[0];
    let with_metric = result
        .trace
        .records()
        .iter()
        .filter(|r| r.metric.is_some())
        .count();
    assert!(with_metric > 0, "AUC runs should log test AUC");
    for record in result.trace.records() {
        if let Some(metric) = record.metric {
            assert!((0.0..=1.0).contains(&metric));
        }
    }
    // Restart indices present for the adaptive solver.
    assert!(result
        .trace
        .records()
        .iter()
        .any(|r| r.restart_index.is_some()));
}
