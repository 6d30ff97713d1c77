//! Numeric c-transforms and surrogates `phi(x, y)` together with the
//! partial minimizers `S(y) = argmin_x phi(x, y)` and
//! `T(x) = argmin_y phi(x, y)`.

use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::costs::CostRef;
use crate::error::{check_dim, Error, Result};
use crate::geometry::x_argmin;
use crate::linalg::Point;
use crate::objective::ObjectiveRef;
use crate::optim::{bfgs, Minimum};
use crate::par::{map_indexed, Execution};
use crate::rng;

/// Settings for multi-start inner optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Random restarts in addition to the warm start.
    pub restarts: usize,
    /// Random restarts for c-transforms nested inside another search.
    pub inner_restarts: usize,
    pub max_iter: usize,
    /// Gradient tolerance of local solves.
    pub tol: f64,
    /// Sampling box for `x`.
    pub bounds: Vec<(f64, f64)>,
    /// Sampling box for `y`; defaults to `bounds`.
    pub dual_bounds: Option<Vec<(f64, f64)>>,
    pub seed: u64,
    /// Values beyond this magnitude are reported as unbounded.
    pub ceiling: f64,
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            inner_restarts: 0,
            max_iter: 500,
            tol: 1e-10,
            bounds: Vec::new(),
            dual_bounds: None,
            seed: 0,
            ceiling: 1e12,
            execution: Execution::default(),
        }
    }
}

impl SearchConfig {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self { bounds: vec![(lo, hi); dim], ..Self::default() }
    }

    pub fn dual_box(&self) -> &[(f64, f64)] {
        self.dual_bounds.as_deref().unwrap_or(&self.bounds)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Stream tags keep the random restarts of different searches independent.
const TAG_C_TRANSFORM: u64 = 1 << 32;
const TAG_ARGMIN_X: u64 = 2 << 32;
const TAG_ARGMIN_Y: u64 = 3 << 32;

/// Minimizes `f` from the warm starts and `restarts` random points of
/// `bounds`; the lowest value wins, ties going to the earliest start.
pub fn multistart_minimize<F, G>(
    f: F,
    grad: G,
    warm: &[Point],
    bounds: &[(f64, f64)],
    restarts: usize,
    cfg: &SearchConfig,
    tag: u64,
) -> Result<Minimum>
where
    F: Fn(&Point) -> Result<f64> + Sync + Send,
    G: Fn(&Point) -> Result<Point> + Sync + Send,
{
    let mut starts: Vec<Point> = warm.to_vec();
    if !bounds.is_empty() {
        let mut r = rng::stream(cfg.seed, tag);
        for _ in 0..restarts {
            starts.push(rng::uniform_in_box(&mut r, bounds));
        }
    }
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting points: empty search box".into()));
    }
    let runs = map_indexed(cfg.execution, starts.len(), |i| bfgs(&f, &grad, &starts[i], cfg.tol, cfg.max_iter, cfg.ceiling));
    let mut best: Option<Minimum> = None;
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(m) => {
                if best.as_ref().map_or(true, |b| m.value < b.value) {
                    best = Some(m);
                }
            }
            Err(e @ Error::Unbounded(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    let best = best.ok_or_else(|| {
        Error::InnerSolveFailure(last_err.map_or("all starts failed".into(), |e| e.to_string()))
    })?;
    if best.converged || best.grad_norm <= 1e-6 * (1.0 + best.value.abs()) {
        Ok(best)
    } else {
        Err(Error::InnerSolveFailure(format!("gradient norm {:e} at best start", best.grad_norm)))
    }
}

/// A c-transform value `f^c(y) = sup_x f(x) - c(x, y)` and its maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct CTransform {
    pub value: f64,
    pub argmax: Point,
}

/// `f^c(y)` by multi-start quasi-Newton.
pub fn c_transform(f: &ObjectiveRef, c: &CostRef, y: &Point, cfg: &SearchConfig) -> Result<CTransform> {
    c_transform_warm(f, c, y, cfg, None, cfg.restarts)
}

fn c_transform_warm(
    f: &ObjectiveRef,
    c: &CostRef,
    y: &Point,
    cfg: &SearchConfig,
    warm: Option<&Point>,
    restarts: usize,
) -> Result<CTransform> {
    check_dim(c.dim_y(), y.len())?;
    check_dim(c.dim_x(), f.dim())?;
    let mut starts = Vec::new();
    if let Some(w) = warm {
        starts.push(w.clone());
    }
    if let Ok(x0) = x_argmin(c.as_ref(), y, None) {
        starts.push(x0);
    }
    let m = multistart_minimize(
        |x| Ok(c.value(x, y)? - f.value(x)?),
        |x| Ok(c.grad_x(x, y)? - f.gradient(x)?),
        &starts,
        &cfg.bounds,
        restarts,
        cfg,
        TAG_C_TRANSFORM,
    )?;
    let value = -m.value;
    if value > cfg.ceiling {
        return Err(Error::Unbounded(cfg.ceiling));
    }
    Ok(CTransform { value, argmax: m.point })
}

/// `phi(x, y) = c(x, y) + f^c(y) + g(x) + h(y)`; absent terms are zero.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub cost: CostRef,
    /// Objective entering through its c-transform.
    pub f: Option<ObjectiveRef>,
    pub g: Option<ObjectiveRef>,
    pub h: Option<ObjectiveRef>,
    pub cfg: SearchConfig,
}

/// Evaluator that warm-starts each inner c-transform from the previous
/// maximizer. One instance per sequential search.
struct DualEvaluator<'a> {
    s: &'a Surrogate,
    last: Mutex<Option<Point>>,
}

impl<'a> DualEvaluator<'a> {
    fn new(s: &'a Surrogate) -> Self {
        Self { s, last: Mutex::new(None) }
    }

    fn transform(&self, y: &Point) -> Result<Option<CTransform>> {
        let Some(f) = &self.s.f else { return Ok(None) };
        let warm = self.last.lock().expect("poisoned").clone();
        let t = c_transform_warm(f, &self.s.cost, y, &self.s.cfg, warm.as_ref(), self.s.cfg.inner_restarts)?;
        *self.last.lock().expect("poisoned") = Some(t.argmax.clone());
        Ok(Some(t))
    }

    /// `f^c(y) + h(y)` and its gradient.
    fn value_grad(&self, y: &Point) -> Result<(f64, Point)> {
        let mut v = 0.0;
        let mut g = Point::zeros(y.len());
        if let Some(t) = self.transform(y)? {
            v += t.value;
            g -= self.s.cost.grad_y(&t.argmax, y)?;
        }
        if let Some(h) = &self.s.h {
            v += h.value(y)?;
            g += h.gradient(y)?;
        }
        Ok((v, g))
    }
}

impl Surrogate {
    pub fn c_transform_surrogate(cost: CostRef, f: ObjectiveRef, cfg: SearchConfig) -> Self {
        Self { cost, f: Some(f), g: None, h: None, cfg }
    }

    pub fn split(cost: CostRef, g: Option<ObjectiveRef>, h: Option<ObjectiveRef>, cfg: SearchConfig) -> Self {
        Self { cost, f: None, g, h, cfg }
    }

    /// `f^c(y) + h(y)`.
    pub fn dual_term(&self, y: &Point) -> Result<f64> {
        let mut v = 0.0;
        if let Some(f) = &self.f {
            v += c_transform(f, &self.cost, y, &self.cfg)?.value;
        }
        if let Some(h) = &self.h {
            v += h.value(y)?;
        }
        Ok(v)
    }

    pub fn primal_term(&self, x: &Point) -> Result<f64> {
        self.g.as_ref().map_or(Ok(0.0), |g| g.value(x))
    }

    pub fn phi(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.cost.value(x, y)? + self.primal_term(x)? + self.dual_term(y)?)
    }

    pub fn grad_x_phi(&self, x: &Point, y: &Point) -> Result<Point> {
        let mut g = self.cost.grad_x(x, y)?;
        if let Some(gg) = &self.g {
            g += gg.gradient(x)?;
        }
        Ok(g)
    }

    /// `S(y) = argmin_x phi(x, y)`.
    pub fn argmin_x(&self, y: &Point, warm: Option<&Point>) -> Result<Point> {
        let Some(g) = &self.g else {
            return x_argmin(self.cost.as_ref(), y, warm);
        };
        let mut starts: Vec<Point> = warm.into_iter().cloned().collect();
        if let Ok(x0) = x_argmin(self.cost.as_ref(), y, warm) {
            starts.push(x0);
        }
        let c = &self.cost;
        let m = multistart_minimize(
            |x| Ok(c.value(x, y)? + g.value(x)?),
            |x| Ok(c.grad_x(x, y)? + g.gradient(x)?),
            &starts,
            &self.cfg.bounds,
            self.cfg.restarts,
            &self.cfg,
            TAG_ARGMIN_X,
        )?;
        Ok(m.point)
    }

    /// `T(x) = argmin_y phi(x, y)` and the marginal value `F(x)`.
    pub fn argmin_y(&self, x: &Point, warm: Option<&Point>) -> Result<(Point, f64)> {
        let c = &self.cost;
        let mut starts: Vec<Point> = warm.into_iter().cloned().collect();
        starts.push(c.dual_guess(x));
        let restarts = self.cfg.restarts;
        let mut box_starts = Vec::new();
        let bounds = self.cfg.dual_box();
        if !bounds.is_empty() {
            let mut r = rng::stream(self.cfg.seed, TAG_ARGMIN_Y);
            for _ in 0..restarts {
                box_starts.push(rng::uniform_in_box(&mut r, bounds));
            }
        }
        starts.extend(box_starts);
        let local = |start: &Point| -> Result<Minimum> {
            let dual = DualEvaluator::new(self);
            bfgs(
                |y| Ok(c.value(x, y)? + dual.value_grad(y)?.0),
                |y| Ok(c.grad_y(x, y)? + dual.value_grad(y)?.1),
                start,
                self.cfg.tol,
                self.cfg.max_iter,
                self.cfg.ceiling,
            )
        };
        let runs = map_indexed(self.cfg.execution, starts.len(), |i| local(&starts[i]));
        let mut best: Option<Minimum> = None;
        let mut last_err = None;
        for run in runs {
            match run {
                Ok(m) => {
                    if best.as_ref().map_or(true, |b| m.value < b.value) {
                        best = Some(m);
                    }
                }
                Err(e @ Error::Unbounded(_)) => return Err(e),
                Err(e) => last_err = Some(e),
            }
        }
        let best = best.ok_or_else(|| {
            Error::InnerSolveFailure(last_err.map_or("all starts failed".into(), |e| e.to_string()))
        })?;
        let value = best.value + self.primal_term(x)?;
        Ok((best.point, value))
    }
}

/// `F(x) = inf_y phi(x, y)` with a minimizing `y`.
pub fn marginal_f(s: &Surrogate, x: &Point) -> Result<(f64, Point)> {
    let (y, v) = s.argmin_y(x, None)?;
    Ok((v, y))
}

/// Agreement between a finite-difference gradient of `F` and the envelope
/// gradient `grad_x phi(x, T(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    pub fd_gradient: Point,
    pub envelope_gradient: Point,
    pub deviation: f64,
}

pub fn check_envelope(s: &Surrogate, x: &Point) -> Result<EnvelopeCheck> {
    let (ybar, _) = s.argmin_y(x, None)?;
    let envelope_gradient = s.grad_x_phi(x, &ybar)?;
    let quiet = Surrogate { cfg: SearchConfig { restarts: 0, ..s.cfg.clone() }, ..s.clone() };
    let fd_gradient = crate::fd::fd_gradient(|z| Ok(quiet.argmin_y(z, Some(&ybar))?.1), x, None)?;
    let deviation = (&fd_gradient - &envelope_gradient).amax() / envelope_gradient.amax().max(1.0);
    Ok(EnvelopeCheck { fd_gradient, envelope_gradient, deviation })
}

pub type SurrogateRef = Arc<Surrogate>;
