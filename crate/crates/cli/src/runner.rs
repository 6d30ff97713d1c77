//! Builds an experiment, runs its solver and checks, and writes the outputs.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use gencost::costs::{
    bregman_cost, log_divergence_cost, quadratic_cost, reverse_bregman_cost, sphere_cost, CostRef,
};
use gencost::linalg::{Matrix, Point};
use gencost::objective::ObjectiveRef;
use gencost::potential::ObjectivePotential;
use gencost::rng;
use gencost::solvers::{self, SolverKind, SolverSpec, SolverTrace};
use gencost::transforms::{check_envelope, SearchConfig, Surrogate};
use gencost::verify::{self, BoundSpec, CertificateKind, PropertyReport, RateCertificate};
use serde::{Deserialize, Serialize};

use crate::build;
use crate::config::{Check, CheckSpec, CostSpec, ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::output;

/// Largest angle between sampled points for sphere cross-curvature checks.
pub const DEFAULT_SPHERE_ANGLE: f64 = 2.5;
const SINKHORN_LIMIT_TOL: f64 = 1e-14;
const SINKHORN_LIMIT_ITER: usize = 100_000;
const STREAM_SINKHORN: u64 = 0x51_0000;

/// An experiment with its library objects constructed.
pub struct Problem {
    pub config: ExperimentConfig,
    pub search: SearchConfig,
    pub cost: Option<CostRef>,
    pub objective: Option<ObjectiveRef>,
}

fn missing(what: &str, name: &str) -> CliError {
    CliError::Config(format!("experiment {name:?} needs {what}"))
}

impl Problem {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let search = config.search.to_config(config.seed);
        let cost = config.cost.as_ref().map(build::cost).transpose()?;
        let objective = config.objective.as_ref().map(build::objective).transpose()?;
        let p = Self { config, search, cost, objective };
        if p.config.solver.is_none() && p.config.checks.iter().any(|c| needs_trace(&c.check)) {
            return Err(missing("a solver for its trace checks", &p.config.name));
        }
        Ok(p)
    }

    fn name(&self) -> &str {
        &self.config.name
    }

    pub fn method(&self) -> Option<&Method> {
        self.config.solver.as_ref().map(|s| &s.method)
    }

    pub fn objective(&self) -> Result<&ObjectiveRef> {
        self.objective.as_ref().ok_or_else(|| missing("an objective", self.name()))
    }

    fn declared_cost(&self) -> Result<&CostRef> {
        self.cost.as_ref().ok_or_else(|| missing("a cost", self.name()))
    }

    /// The cost the solver works with. Classical solvers imply theirs;
    /// the others use the declared one.
    pub fn effective_cost(&self) -> Result<CostRef> {
        Ok(match self.method() {
            Some(Method::GradientDescent { x0, l }) => quadratic_cost(x0.len(), *l),
            Some(Method::MirrorDescent { potential, .. }) => bregman_cost(build::potential(potential)?),
            Some(Method::NaturalGradient { potential, .. }) => reverse_bregman_cost(build::potential(potential)?),
            Some(Method::Newton { .. }) => reverse_bregman_cost(Arc::new(ObjectivePotential(self.objective()?.clone()))),
            Some(Method::RiemannianSphere { x0, l }) => sphere_cost(x0.len(), *l),
            Some(Method::LogDivergenceGd { potential, alpha, .. }) => {
                log_divergence_cost(build::potential(potential)?, *alpha)?
            }
            _ => self.declared_cost()?.clone(),
        })
    }

    /// The surrogate of the alternating-minimization solver, or the
    /// c-transform surrogate of the objective.
    pub fn surrogate(&self) -> Result<Surrogate> {
        if let Some(Method::AlternatingMin { g, h, .. }) = self.method() {
            return Ok(Surrogate {
                cost: self.declared_cost()?.clone(),
                f: self.objective.clone(),
                g: g.as_ref().map(build::objective).transpose()?,
                h: h.as_ref().map(build::objective).transpose()?,
                cfg: self.search.clone(),
            });
        }
        Ok(Surrogate::c_transform_surrogate(self.effective_cost()?, self.objective()?.clone(), self.search.clone()))
    }

    /// The nonsmooth term of forward-backward.
    pub fn fb_g(&self) -> Result<Option<ObjectiveRef>> {
        match self.method() {
            Some(Method::ForwardBackward { g, .. }) => g.as_ref().map(build::objective).transpose(),
            _ => Ok(None),
        }
    }

    /// Cost matrix and marginals of a Sinkhorn experiment.
    pub fn sinkhorn_data(&self) -> Result<(Matrix, f64, Point, Point)> {
        let Some(Method::Sinkhorn { b, size, eps, mu, nu }) = self.method() else {
            return Err(missing("a sinkhorn solver", self.name()));
        };
        let b = match (b, size) {
            (Some(rows), _) => build::matrix(rows)?,
            (None, Some((m, k))) => {
                let mut r = rng::stream(self.config.seed, STREAM_SINKHORN);
                let bounds = vec![(0.0, 1.0); m * k];
                let v = rng::uniform_in_box(&mut r, &bounds);
                Matrix::from_row_slice(*m, *k, v.as_slice())
            }
            (None, None) => return Err(missing("a cost matrix or a size", self.name())),
        };
        let (m, k) = b.shape();
        let marginal = |given: &Option<Vec<f64>>, n: usize, index: u64| -> Result<Point> {
            match given {
                Some(v) if v.len() == n => Ok(build::vector(v)),
                Some(_) => Err(CliError::Config("marginal length does not match the cost matrix".into())),
                None => Ok(rng::probability_vector(&mut rng::stream(self.config.seed, STREAM_SINKHORN + index), n)),
            }
        };
        Ok((b.clone(), *eps, marginal(mu, m, 1)?, marginal(nu, k, 2)?))
    }
}

fn horizon_spec(p: &Problem) -> SolverSpec {
    SolverSpec::horizon(p.config.solver.as_ref().map_or(1, |s| s.horizon))
}

/// Runs the configured solver.
pub fn solve(p: &Problem) -> Result<SolverTrace> {
    let spec = horizon_spec(p);
    let v = build::vector;
    let method = p.method().ok_or_else(|| missing("a solver", p.name()))?;
    Ok(match method {
        Method::AlternatingMin { x0, .. } => solvers::alternating_minimize(&p.surrogate()?, &v(x0), &spec)?,
        Method::GdgcExplicit { x0 } => solvers::gdgc_explicit(p.objective()?, p.declared_cost()?, &v(x0), &spec)?,
        Method::GdgcSurrogate { x0 } => {
            solvers::gdgc_surrogate(p.objective()?, p.declared_cost()?, &v(x0), &spec, &p.search)?
        }
        Method::ForwardBackward { x0, .. } => {
            let g = p.fb_g()?;
            solvers::forward_backward(p.objective()?, g.as_ref(), p.declared_cost()?, &v(x0), &spec, &p.search)?
        }
        Method::GradientDescent { x0, l } => solvers::gradient_descent(p.objective()?, *l, &v(x0), &spec)?,
        Method::MirrorDescent { x0, potential } => {
            solvers::mirror_descent(p.objective()?, &build::potential(potential)?, &v(x0), &spec)?
        }
        Method::NaturalGradient { x0, potential } => {
            solvers::natural_gradient(p.objective()?, &build::potential(potential)?, &v(x0), &spec)?
        }
        Method::Newton { x0 } => solvers::newton(p.objective()?, &v(x0), &spec)?,
        Method::RiemannianSphere { x0, l } => solvers::riemannian_sphere_gd(p.objective()?, *l, &v(x0), &spec)?,
        Method::LogDivergenceGd { x0, potential, alpha } => {
            solvers::log_divergence_gd(p.objective()?, &build::potential(potential)?, *alpha, &v(x0), &spec)?
        }
        Method::Sinkhorn { .. } => {
            let (b, eps, mu, nu) = p.sinkhorn_data()?;
            solvers::sinkhorn(&b, eps, &mu, &nu, &spec)?.trace
        }
        Method::Pocs { x0, first, second } => solvers::pocs(first, second, &v(x0), &spec)?,
        Method::LatentEm { k, mu, theta0 } => solvers::latent_em(&build::matrix(k)?, &v(mu), &v(theta0), &spec)?,
    })
}

/// Constants of a rate bound for the experiment's solver.
pub fn bound_for(
    p: &Problem,
    trace: &SolverTrace,
    kind: CertificateKind,
    reference: Option<&[f64]>,
    lambda: f64,
    mu: f64,
    f_star: Option<f64>,
) -> Result<BoundSpec> {
    let x = || reference.map(build::vector).ok_or_else(|| missing("a reference point for its certificate", p.name()));
    let retag = |b: BoundSpec| BoundSpec::new(kind, b.reference_value, b.offset).with_rates(lambda, mu);
    Ok(match trace.solver {
        SolverKind::AlternatingMin => verify::am_bound(kind, &p.surrogate()?, trace, &x()?, lambda)?,
        SolverKind::ForwardBackward => {
            let g = p.fb_g()?;
            verify::fb_bound(kind, p.objective()?, g.as_ref(), p.effective_cost()?.as_ref(), trace, &x()?, lambda, mu)?
        }
        SolverKind::Newton if f_star.is_some() => retag(verify::newton_bound(p.objective()?, trace, f_star.unwrap_or(0.0))?),
        SolverKind::GdgcExplicit
        | SolverKind::GdgcSurrogate
        | SolverKind::GradientDescent
        | SolverKind::MirrorDescent
        | SolverKind::NaturalGradient
        | SolverKind::Newton
        | SolverKind::RiemannianSphere
        | SolverKind::LogDivergenceGd => {
            verify::gdgc_bound(kind, p.objective()?, p.effective_cost()?.as_ref(), trace, &x()?, lambda)?
        }
        SolverKind::Sinkhorn => {
            let (b, eps, m, n) = p.sinkhorn_data()?;
            let pi_star = solvers::sinkhorn_limit(&b, eps, &m, &n, SINKHORN_LIMIT_TOL, SINKHORN_LIMIT_ITER)?;
            let y0 = trace.y(0).ok_or(gencost::Error::MissingDualIterates)?;
            let gamma0 = Matrix::from_row_slice(b.nrows(), b.ncols(), y0.as_slice());
            retag(verify::sinkhorn_bound(&gamma0, &pi_star)?)
        }
        SolverKind::Pocs => {
            let Some(Method::Pocs { second, .. }) = p.method() else {
                return Err(missing("a pocs solver", p.name()));
            };
            retag(verify::pocs_bound(second, trace, &x()?)?)
        }
        SolverKind::LatentEm => {
            return Err(CliError::Core(gencost::Error::InvalidParameter("latent EM has no rate certificate".into())))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Passed,
    Failed,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub point: Vec<f64>,
    pub fd_gradient: Vec<f64>,
    pub envelope_gradient: Vec<f64>,
    pub deviation: f64,
    pub pass: bool,
}

/// Outcome of one declared check. `passed` already accounts for
/// `expect_violation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub index: usize,
    pub check: String,
    pub expect_violation: bool,
    pub status: CheckStatus,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<RateCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<PropertyReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub envelope: Vec<EnvelopeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub kind: SolverKind,
    pub label: String,
    pub iterations: usize,
    pub final_objective: f64,
}

/// Output file names, relative to the experiment directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFiles {
    pub config_echo: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_json: Option<String>,
    pub timings: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub files: OutputFiles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_error: Option<String>,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTiming {
    pub check: String,
    pub seconds: f64,
}

/// Wall-clock timings, kept apart from the report so the report stays
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub name: String,
    pub solver_seconds: f64,
    pub checks: Vec<CheckTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    pub trace: Option<SolverTrace>,
}

enum Verdict {
    Certificate(RateCertificate),
    Property(PropertyReport),
    Envelope(Vec<EnvelopeRow>),
}

impl Verdict {
    fn holds(&self) -> bool {
        match self {
            Verdict::Certificate(c) => c.passed,
            Verdict::Property(r) => r.passed,
            Verdict::Envelope(rows) => rows.iter().all(|r| r.pass),
        }
    }
}

fn run_check(p: &Problem, trace: Option<&SolverTrace>, check: &Check) -> Result<Verdict> {
    let trace = || trace.ok_or_else(|| CliError::Core(gencost::Error::InvalidParameter("solver produced no trace".into())));
    let cfg = &p.search;
    Ok(match check {
        Check::RateCertificate { kind, reference, lambda, mu, f_star } => {
            let t = trace()?;
            let bound = bound_for(p, t, *kind, reference.as_deref(), *lambda, *mu, *f_star)?;
            Verdict::Certificate(verify::rate_certificate(t, &bound)?)
        }
        Check::Descent { tol } => Verdict::Property(verify::check_descent(trace()?, *tol)),
        Check::DescentGap { f_star } => {
            Verdict::Property(verify::check_descent_gap(trace()?, p.effective_cost()?.as_ref(), *f_star)?)
        }
        Check::FivePoint { lambda, form, samples } => {
            Verdict::Property(verify::check_five_point(&p.surrogate()?, *lambda, *form, *samples, cfg)?)
        }
        Check::CConcavity { samples } => {
            Verdict::Property(verify::check_c_concavity(p.objective()?, &p.effective_cost()?, *samples, cfg)?)
        }
        Check::CrossConvexity { lambda, mode, samples } => Verdict::Property(verify::check_cross_convexity(
            p.objective()?,
            &p.effective_cost()?,
            *lambda,
            *mode,
            *samples,
            cfg,
        )?),
        Check::CrossConcavity { lambda, mode, samples } => {
            let g = p.fb_g()?.ok_or_else(|| missing("a forward-backward g", p.name()))?;
            Verdict::Property(verify::check_cross_concavity(&g, &p.effective_cost()?, *lambda, *mode, *samples, cfg)?)
        }
        Check::Lyapunov { x, y } => Verdict::Property(verify::lyapunov_check(
            trace()?,
            &p.surrogate()?,
            &build::vector(x),
            &build::vector(y),
        )?),
        Check::Envelope { points, tol } => {
            let s = p.surrogate()?;
            let rows = points
                .iter()
                .map(|x| {
                    let e = check_envelope(&s, &build::vector(x))?;
                    Ok(EnvelopeRow {
                        point: x.clone(),
                        fd_gradient: e.fd_gradient.as_slice().to_vec(),
                        envelope_gradient: e.envelope_gradient.as_slice().to_vec(),
                        deviation: e.deviation,
                        pass: e.deviation <= *tol,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Verdict::Envelope(rows)
        }
        Check::CrossCurvature { expect, tol, samples, max_angle } => match &p.config.cost {
            Some(CostSpec::Sphere { dim, l }) => Verdict::Property(verify::check_sphere_cross_curvature(
                *dim,
                *l,
                max_angle.unwrap_or(DEFAULT_SPHERE_ANGLE),
                *expect,
                *tol,
                *samples,
                cfg.seed,
                cfg.execution,
            )?),
            _ => Verdict::Property(verify::check_cross_curvature(&p.effective_cost()?, *expect, *tol, *samples, cfg)?),
        },
    })
}

fn evaluate(index: usize, spec: &CheckSpec, outcome: Result<Verdict>) -> Result<CheckResult> {
    let mut result = CheckResult {
        index,
        check: spec.check.name().into(),
        expect_violation: spec.expect_violation,
        status: CheckStatus::Error,
        passed: false,
        error: None,
        certificate: None,
        property: None,
        envelope: Vec::new(),
    };
    match outcome {
        Err(e @ CliError::Config(_)) => return Err(e),
        Err(e) => result.error = Some(e.to_string()),
        Ok(v) => {
            let holds = v.holds();
            result.status = if holds { CheckStatus::Passed } else { CheckStatus::Failed };
            result.passed = holds != spec.expect_violation;
            match v {
                Verdict::Certificate(c) => result.certificate = Some(c),
                Verdict::Property(r) => result.property = Some(r),
                Verdict::Envelope(rows) => result.envelope = rows,
            }
        }
    }
    Ok(result)
}

/// Runs an experiment without writing anything.
pub fn execute(config: ExperimentConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let p = Problem::new(config)?;
    let has_solver = p.config.solver.is_some();
    let (trace, solver_error) = if has_solver {
        match solve(&p) {
            Ok(t) => (Some(t), None),
            Err(e @ CliError::Config(_)) => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    let solver_seconds = start.elapsed().as_secs_f64();
    let mut checks = Vec::with_capacity(p.config.checks.len());
    let mut check_timings = Vec::with_capacity(p.config.checks.len());
    for (i, spec) in p.config.checks.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = match (&solver_error, trace.as_ref()) {
            (Some(e), _) if needs_trace(&spec.check) => {
                Err(CliError::Core(gencost::Error::InvalidParameter(format!("solver failed: {e}"))))
            }
            _ => run_check(&p, trace.as_ref(), &spec.check),
        };
        checks.push(evaluate(i, spec, outcome)?);
        check_timings.push(CheckTiming { check: spec.check.name().into(), seconds: t0.elapsed().as_secs_f64() });
    }
    let passed = solver_error.is_none() && checks.iter().all(|c| c.passed);
    let solver = trace.as_ref().map(|t| SolverSummary {
        kind: t.solver,
        label: t.label.clone(),
        iterations: t.len().saturating_sub(1),
        final_objective: t.records.last().map_or(f64::NAN, |r| r.objective),
    });
    let files = OutputFiles {
        config_echo: output::CONFIG_ECHO.into(),
        trace_csv: has_solver.then(|| output::TRACE_CSV.into()),
        trace_json: has_solver.then(|| output::TRACE_JSON.into()),
        timings: output::TIMINGS.into(),
    };
    let name = p.config.name.clone();
    let report = RunReport { name: name.clone(), seed: p.config.seed, config: p.config, files, solver, solver_error, checks, passed };
    let timings = Timings { name, solver_seconds, checks: check_timings, total_seconds: start.elapsed().as_secs_f64() };
    Ok(RunOutcome { report, timings, trace })
}

fn needs_trace(check: &Check) -> bool {
    matches!(check, Check::RateCertificate { .. } | Check::Descent { .. } | Check::DescentGap { .. } | Check::Lyapunov { .. })
}

/// Runs an experiment and writes its files under `out_root/<name>/`.
pub fn run_experiment(config: ExperimentConfig, out_root: &Path) -> Result<RunOutcome> {
    let outcome = execute(config)?;
    output::write_outputs(&out_root.join(&outcome.report.name), &outcome)?;
    Ok(outcome)
}
