//! Output files of an experiment run.

use std::path::Path;

use gencost::solvers::SolverTrace;
use gencost::verify::RateCertificate;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::runner::RunOutcome;

pub const CONFIG_ECHO: &str = "config.toml";
pub const TRACE_CSV: &str = "trace.csv";
pub const TRACE_JSON: &str = "trace.json";
pub const REPORT: &str = "report.json";
pub const TIMINGS: &str = "timings.json";

pub const CSV_HEADER: [&str; 6] = ["n", "f", "phi", "gap", "bound_lhs", "bound_rhs"];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

/// Writes `trace.csv`. Bound columns come from `certificate` and are empty
/// at `n = 0` or without one.
pub fn write_trace_csv(path: &Path, trace: &SolverTrace, certificate: Option<&RateCertificate>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &trace.records {
        let row = certificate.and_then(|c| c.rows.iter().find(|row| row.n == r.n));
        w.write_record([
            r.n.to_string(),
            format_real(r.objective),
            opt(r.phi),
            opt(r.gap),
            opt(row.map(|x| x.lhs)),
            opt(row.map(|x| x.rhs)),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

/// One parsed row of `trace.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub f: f64,
    pub phi: Option<f64>,
    pub gap: Option<f64>,
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(CliError::Config(format!("{}: unexpected header", path.display())));
    }
    let bad = |what: &str| CliError::Config(format!("{}: malformed {what}", path.display()));
    let real = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad("number"))
        }
    };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(CsvRow {
                n: rec[0].parse().map_err(|_| bad("index"))?,
                f: real(&rec[1])?.ok_or_else(|| bad("f column"))?,
                phi: real(&rec[2])?,
                gap: real(&rec[3])?,
                bound_lhs: real(&rec[4])?,
                bound_rhs: real(&rec[5])?,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes every file of a run into `dir`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let echo = outcome.report.config.to_toml()?;
    let echo_path = dir.join(CONFIG_ECHO);
    std::fs::write(&echo_path, echo).map_err(|e| CliError::io(&echo_path, e))?;
    if let Some(trace) = &outcome.trace {
        let cert = outcome.report.checks.iter().find_map(|c| c.certificate.as_ref());
        write_trace_csv(&dir.join(TRACE_CSV), trace, cert)?;
        write_json(&dir.join(TRACE_JSON), trace)?;
    }
    write_json(&dir.join(REPORT), &outcome.report)?;
    write_json(&dir.join(TIMINGS), &outcome.timings)
}
