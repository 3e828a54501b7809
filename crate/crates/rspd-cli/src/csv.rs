//! CSV trace files: one per seed, with a `gap` column relative to the
//! optimal-value estimate. Values use 17 significant digits so a reparse
//! reproduces the in-memory trace exactly.

use std::path::{Path, PathBuf};

use rspd::algorithms::SolverResult;
use rspd::trace::TraceRecord;

use crate::error::CliError;

pub const CSV_HEADER: &str = "gradients,seconds,objective,gap,metric,stage,restart";

/// 17-significant-digit decimal formatting; round-trips every f64.
pub fn format_g17(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

/// Writes one CSV per seed into `dir`; returns the paths in seed order.
pub fn write_trace_csv(
    results: &[(u64, SolverResult)],
    pstar: f64,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    let mut paths = Vec::with_capacity(results.len());
    for (seed, result) in results {
        let path = dir.join(trace_file_name(*seed));
        let mut text = String::from(CSV_HEADER);
        text.push('\n');
        for record in result.trace.records() {
            text.push_str(&record_line(record, pstar));
            text.push('\n');
        }
        std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        paths.push(path);
    }
    Ok(paths)
}

fn record_line(record: &TraceRecord, pstar: f64) -> String {
    let metric = record.metric.map(format_g17).unwrap_or_default();
    let restart = record
        .restart_index
        .map(|r| r.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{},{metric},{},{restart}",
        record.gradients_used,
        format_g17(record.wall_seconds),
        format_g17(record.objective),
        format_g17(record.objective - pstar),
        record.stage,
    )
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub gradients: u64,
    pub seconds: f64,
    pub objective: f64,
    pub gap: f64,
    pub metric: Option<f64>,
    pub stage: u32,
    pub restart: Option<u32>,
}

impl CsvRecord {
    pub fn to_trace_record(&self) -> TraceRecord {
        TraceRecord {
            gradients_used: self.gradients,
            wall_seconds: self.seconds,
            objective: self.objective,
            metric: self.metric,
            stage: self.stage,
            restart_index: self.restart,
        }
    }
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<CsvRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(CliError::Data(format!(
                "{}: expected header `{CSV_HEADER}`, found {other:?}",
                path.display()
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(CliError::Data(format!(
                "{}: line {} has {} fields, expected 7",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let parse_f64 = |s: &str, what: &str| -> Result<f64, CliError> {
            s.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {}: bad {what} `{s}`",
                    path.display(),
                    i + 2
                ))
            })
        };
        records.push(CsvRecord {
            gradients: fields[0].parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {}: bad gradient count",
                    path.display(),
                    i + 2
                ))
            })?,
            seconds: parse_f64(fields[1], "seconds")?,
            objective: parse_f64(fields[2], "objective")?,
            gap: parse_f64(fields[3], "gap")?,
            metric: if fields[4].is_empty() {
                None
            } else {
                Some(parse_f64(fields[4], "metric")?)
            },
            stage: fields[5].parse().map_err(|_| {
                CliError::Data(format!("{}: line {}: bad stage", path.display(), i + 2))
            })?,
            restart: if fields[6].is_empty() {
                None
            } else {
                Some(fields[6].parse().map_err(|_| {
                    CliError::Data(format!(
                        "{}: line {}: bad restart index",
                        path.display(),
                        i + 2
                    ))
                })?)
            },
        });
    }
    Ok(records)
}
