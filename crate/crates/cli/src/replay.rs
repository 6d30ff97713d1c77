//! Recomputes a rate certificate from the files of a finished run.

use std::path::Path;

use gencost::solvers::SolverTrace;
use gencost::verify::{rate_certificate, CertificateKind, RateCertificate};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{self, CONFIG_ECHO, TRACE_JSON};
use crate::runner::{bound_for, Problem};

#[derive(Debug, Clone, Default)]
pub struct BoundArgs {
    pub reference: Option<Vec<f64>>,
    pub lambda: f64,
    pub mu: f64,
    pub f_star: Option<f64>,
}

/// Reads `trace.csv` and its sibling `trace.json` and config echo, and
/// checks the bound of `kind` against the objective column of the CSV.
pub fn verify_trace(csv_path: &Path, kind: CertificateKind, args: &BoundArgs) -> Result<RateCertificate> {
    let dir = csv_path.parent().unwrap_or(Path::new("."));
    let rows = output::read_trace_csv(csv_path)?;
    let mut trace: SolverTrace = output::read_json(&dir.join(TRACE_JSON))?;
    let config = ExperimentConfig::load(&dir.join(CONFIG_ECHO))?;
    if rows.len() != trace.len() || rows.iter().zip(&trace.records).any(|(a, b)| a.n != b.n) {
        return Err(CliError::Config(format!("{} does not match {TRACE_JSON}", csv_path.display())));
    }
    for (rec, row) in trace.records.iter_mut().zip(&rows) {
        if rec.objective.to_bits() != row.f.to_bits() {
            return Err(CliError::Config(format!("f column differs from {TRACE_JSON} at n = {}", row.n)));
        }
        rec.objective = row.f;
    }
    let problem = Problem::new(config)?;
    let bound = bound_for(&problem, &trace, kind, args.reference.as_deref(), args.lambda, args.mu, args.f_star)?;
    Ok(rate_certificate(&trace, &bound)?)
}
