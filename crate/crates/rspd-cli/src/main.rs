use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rspd_cli::config::{load_config, resolve_outputs};
use rspd_cli::csv::write_trace_csv;
use rspd_cli::error::CliError;
use rspd_cli::plot::{emit_plot, XColumn, YColumn};
use rspd_cli::pstar::estimate_pstar;
use rspd_cli::runner::{build_problem, run_experiment};
use rspd_cli::sweep::run_sweep;

#[derive(Parser)]
#[command(
    name = "rspd-cli",
    about = "Stochastic primal-dual experiment harness: runs, sweeps, gap references, traces, plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config and write CSV traces.
    Run { config: PathBuf },
    /// Compute (or recall from cache) the optimal-value reference.
    Pstar { config: PathBuf },
    /// Draw a deterministic SVG line chart from CSV traces.
    Plot {
        /// X axis column.
        #[arg(long, value_enum, default_value_t = XAxis::Gradients)]
        x: XAxis,
        /// Y axis column (gap is log-scale).
        #[arg(long, value_enum, default_value_t = YAxis::Gap)]
        y: YAxis,
        /// Output SVG path.
        #[arg(short, long)]
        output: PathBuf,
        /// Input CSV traces.
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
    },
    /// Tune the initial step size over the decade grid 1e-5..1e3.
    Sweep { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum XAxis {
    Gradients,
    Seconds,
}

#[derive(Clone, Copy, ValueEnum)]
enum YAxis {
    Gap,
    Metric,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            let outputs = resolve_outputs(&config);
            let built = build_problem(&config.problem)?;
            let pstar = estimate_pstar(&config, built.problem.as_ref(), &outputs)?;
            let results = run_experiment(&config)?;
            let paths = write_trace_csv(&results, pstar.value, &outputs)?;
            for ((seed, result), path) in results.iter().zip(&paths) {
                let last = result
                    .trace
                    .last()
                    .expect("traces contain the initial record");
                println!(
                    "seed {seed}: {} gradients, objective {:.6e}, gap {:.6e} -> {}",
                    result.gradients_total,
                    last.objective,
                    last.objective - pstar.value,
                    path.display()
                );
            }
            Ok(())
        }
        Command::Pstar { config } => {
            let config = load_config(&config)?;
            let outputs = resolve_outputs(&config);
            let built = build_problem(&config.problem)?;
            let estimate = estimate_pstar(&config, built.problem.as_ref(), &outputs)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&estimate).expect("serializable")
            );
            Ok(())
        }
        Command::Plot { x, y, output, csvs } => {
            let x = match x {
                XAxis::Gradients => XColumn::Gradients,
                XAxis::Seconds => XColumn::Seconds,
            };
            let y = match y {
                YAxis::Gap => YColumn::Gap,
                YAxis::Metric => YColumn::Metric,
            };
            emit_plot(&csvs, x, y, &output)?;
            println!("wrote {}", output.display());
            Ok(())
        }
        Command::Sweep { config } => {
            let config = load_config(&config)?;
            let outputs = resolve_outputs(&config);
            let report = run_sweep(&config, &outputs)?;
            for entry in &report.entries {
                println!(
                    "eta {:>8}: median final objective {:.6e}",
                    entry.label, entry.median_final_objective
                );
            }
            println!(
                "best: eta {} ({:.6e})",
                report.best.label, report.best.median_final_objective
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
