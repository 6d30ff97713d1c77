//! Sampled property checkers.

use serde::{Deserialize, Serialize};

use super::{check_lambda, scaled, PropertyReport};
use crate::costs::CostRef;
use crate::error::{Error, Result};
use crate::geometry::{c_exponential, c_segment, convexity_along_segment, cross_curvature, cross_difference, sphere_cross_curvature};
use crate::linalg::{max_abs, min_eigenvalue, symmetrize, Matrix, Point};
use crate::objective::ObjectiveRef;
use crate::par::{map_indexed, Execution};
use crate::rng;
use crate::transforms::{SearchConfig, Surrogate};

const TAG_FIVE_POINT: u64 = 1;
const TAG_C_CONCAVITY: u64 = 2;
const TAG_CROSS_CONVEXITY: u64 = 3;
const TAG_CROSS_CONCAVITY: u64 = 4;
const TAG_CURVATURE: u64 = 5;

const INEQUALITY_TOL: f64 = 1e-7;
const EIGEN_TOL: f64 = 1e-7;
const ASYMMETRY_TOL: f64 = 1e-8;

/// One inequality `lhs <= rhs + tol` evaluated at a sample.
struct Outcome {
    witness: Vec<Point>,
    lhs: f64,
    rhs: f64,
    tol: f64,
}

impl Outcome {
    fn scaled(witness: Vec<Point>, lhs: f64, rhs: f64) -> Self {
        Self { witness, lhs, rhs, tol: scaled(INEQUALITY_TOL, lhs, rhs) }
    }
}

fn sample_stream(seed: u64, tag: u64, i: usize) -> rand_chacha::ChaCha8Rng {
    rng::stream(seed, (tag << 32) | i as u64)
}

/// Runs `eval` on every sample index in parallel and folds the outcomes in
/// index order. The first failing sample's error is returned.
fn collect<F>(report: &mut PropertyReport, exec: Execution, samples: usize, eval: F) -> Result<()>
where
    F: Fn(usize) -> Result<Vec<Outcome>> + Sync + Send,
{
    for (i, outcomes) in map_indexed(exec, samples, eval).into_iter().enumerate() {
        for o in outcomes? {
            let w: Vec<&Point> = o.witness.iter().collect();
            report.record(i, &w, o.lhs, o.rhs, o.tol);
        }
    }
    Ok(())
}

/// `lhs = -min eig(sym(m))`, plus an asymmetry outcome when `m` is not
/// symmetric to within tolerance.
fn eigen_outcomes(witness: Vec<Point>, m: &Matrix) -> Vec<Outcome> {
    let scale = max_abs(m).max(1.0);
    let asym = max_abs(&(m - m.transpose()));
    let mut out = Vec::new();
    if asym > ASYMMETRY_TOL * scale {
        out.push(Outcome { witness: witness.clone(), lhs: asym, rhs: 0.0, tol: ASYMMETRY_TOL * scale });
    }
    out.push(Outcome { witness, lhs: -min_eigenvalue(&symmetrize(m)), rhs: 0.0, tol: EIGEN_TOL });
    out
}

/// Which inequality the five-point check tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FivePointForm {
    /// `phi(x,y1) + (1-l) phi(x0,y0) <= phi(x,y) + (1-l) phi(x,y0)`.
    #[default]
    Standard,
    /// The weaker form with `phi(x0,y1)` in place of `phi(x0,y0)`.
    CsiszarTusnady,
}

/// Samples `(x, y, y0)`, sets `x0 = S(y0)` and `y1 = T(x0)` and tests the
/// five-point inequality. Each sample is tested with the drawn `y` and with
/// `y = T(x)`, which makes the right side smallest.
pub fn check_five_point(
    phi: &Surrogate,
    lambda: f64,
    form: FivePointForm,
    samples: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport> {
    check_lambda(lambda)?;
    let name = match form {
        FivePointForm::Standard => "five_point",
        FivePointForm::CsiszarTusnady => "five_point_csiszar_tusnady",
    };
    let mut report = PropertyReport::new(name, samples, cfg.seed);
    let c = &phi.cost;
    let eval = |i: usize| -> Result<Vec<Outcome>> {
        let mut r = sample_stream(cfg.seed, TAG_FIVE_POINT, i);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let y = rng::uniform_in_box(&mut r, cfg.dual_box());
        let y0 = rng::uniform_in_box(&mut r, cfg.dual_box());
        let inner = |e: Error| Error::InnerSolveFailure(e.to_string());
        let x0 = phi.argmin_x(&y0, None).map_err(inner)?;
        let (y1, _) = phi.argmin_y(&x0, None).map_err(inner)?;
        let (yt, fx) = phi.argmin_y(&x, None).map_err(inner)?;
        let (d_y, d_y0, d_y1) = (phi.dual_term(&y)?, phi.dual_term(&y0)?, phi.dual_term(&y1)?);
        let (g_x, g_x0) = (phi.primal_term(&x)?, phi.primal_term(&x0)?);
        let at = |p: &Point, gp: f64, q: &Point, dq: f64| -> Result<f64> { Ok(c.value(p, q)? + gp + dq) };
        let phi_x_y1 = at(&x, g_x, &y1, d_y1)?;
        let phi_x_y0 = at(&x, g_x, &y0, d_y0)?;
        let second = match form {
            FivePointForm::Standard => at(&x0, g_x0, &y0, d_y0)?,
            FivePointForm::CsiszarTusnady => at(&x0, g_x0, &y1, d_y1)?,
        };
        let lhs = phi_x_y1 + (1.0 - lambda) * second;
        let mut out = Vec::with_capacity(2);
        let phi_x_y = at(&x, g_x, &y, d_y)?;
        for (yy, phi_x_yy) in [(y, phi_x_y), (yt, fx)] {
            let rhs = phi_x_yy + (1.0 - lambda) * phi_x_y0;
            out.push(Outcome::scaled(vec![x.clone(), yy, y0.clone(), x0.clone(), y1.clone()], lhs, rhs));
        }
        Ok(out)
    };
    collect(&mut report, phi.cfg.execution, samples, eval)?;
    report.notes.push("witness order: x, y, y0, x0, y1".into());
    Ok(report)
}

/// Local criterion for c-concavity: at `y_hat = c_exp(x, -grad f(x))` the
/// matrix `hess_xx c(x, y_hat) - hess f(x)` is positive semidefinite.
/// Only sufficient when the cost has nonnegative cross-curvature.
pub fn check_c_concavity(f: &ObjectiveRef, c: &CostRef, samples: usize, cfg: &SearchConfig) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("c_concavity", samples, cfg.seed);
    let eval = |i: usize| -> Result<Vec<Outcome>> {
        let mut r = sample_stream(cfg.seed, TAG_C_CONCAVITY, i);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let y_hat = c_exponential(c.as_ref(), &x, &-f.gradient(&x)?)?;
        let m = c.hess_xx(&x, &y_hat)? - f.hessian(&x)?;
        Ok(eigen_outcomes(vec![x, y_hat], &m))
    };
    collect(&mut report, cfg.execution, samples, eval)?;
    report.notes.push("witness order: x, y_hat".into());
    Ok(report)
}

/// How cross-convexity or cross-concavity is tested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityMode {
    /// The defining inequality at sampled `(x, x_bar)`.
    #[default]
    Direct,
    /// Convexity along c-segments from `x_bar` to `x`; sufficient when the
    /// cost has nonnegative cross-curvature.
    Semilocal,
    /// The second-order necessary condition at `x_bar`. Passing it does not
    /// establish cross-convexity.
    Necessary,
}

fn anchors(c: &CostRef, x_bar: &Point, xi: &Point) -> Result<(Point, Point)> {
    let y_bar = c_exponential(c.as_ref(), x_bar, &Point::zeros(x_bar.len()))?;
    let y_hat = c_exponential(c.as_ref(), x_bar, xi)?;
    Ok((y_bar, y_hat))
}

/// Cross-convexity of `f`: with `grad_x c(x_bar, y_bar) = 0` and
/// `y_hat = c_exp(x_bar, -grad f(x_bar))`,
/// `f(x) >= f(x_bar) + delta_c(x, y_bar; x_bar, y_hat) + lambda (c(x, y_bar) - c(x_bar, y_bar))`.
pub fn check_cross_convexity(
    f: &ObjectiveRef,
    c: &CostRef,
    lambda: f64,
    mode: ConvexityMode,
    samples: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport> {
    check_lambda(lambda)?;
    if mode == ConvexityMode::Necessary && lambda != 0.0 {
        return Err(Error::InvalidParameter("the necessary condition is only available for lambda = 0".into()));
    }
    let name = match mode {
        ConvexityMode::Direct => "cross_convexity",
        ConvexityMode::Semilocal => "cross_convexity_semilocal",
        ConvexityMode::Necessary => "cross_convexity_necessary",
    };
    let mut report = PropertyReport::new(name, samples, cfg.seed);
    let eval = |i: usize| -> Result<Vec<Outcome>> {
        let mut r = sample_stream(cfg.seed, TAG_CROSS_CONVEXITY, i);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let x_bar = rng::uniform_in_box(&mut r, &cfg.bounds);
        let (y_bar, y_hat) = anchors(c, &x_bar, &-f.gradient(&x_bar)?)?;
        match mode {
            ConvexityMode::Direct => {
                let delta = cross_difference(c.as_ref(), &x, &y_bar, &x_bar, &y_hat)?;
                let strong = lambda * (c.value(&x, &y_bar)? - c.value(&x_bar, &y_bar)?);
                let rhs = f.value(&x)?;
                let lhs = f.value(&x_bar)? + delta + strong;
                Ok(vec![Outcome::scaled(vec![x, x_bar, y_bar, y_hat], lhs, rhs)])
            }
            ConvexityMode::Semilocal => {
                let seg = c_segment(c.as_ref(), &x_bar, &x, &y_bar)?;
                let conv = convexity_along_segment(|p| Ok(f.value(p)? - lambda * c.value(p, &y_bar)?), &seg)?;
                Ok(vec![Outcome { witness: vec![x, x_bar, y_bar], lhs: -conv.min_second_difference, rhs: 0.0, tol: conv.tolerance }])
            }
            ConvexityMode::Necessary => {
                let m = f.hessian(&x_bar)? - c.hess_xx(&x_bar, &y_hat)? + c.hess_xx(&x_bar, &y_bar)?;
                Ok(eigen_outcomes(vec![x_bar, y_bar, y_hat], &m))
            }
        }
    };
    collect(&mut report, cfg.execution, samples, eval)?;
    if mode == ConvexityMode::Necessary {
        report.notes.push("necessary condition only; cross-convexity is not inferred from it".into());
    }
    Ok(report)
}

/// Cross-concavity of `-g`: with `grad_x c(x_bar, y_bar) = 0` and
/// `y_hat = c_exp(x_bar, grad g(x_bar))`,
/// `-g(x) <= -g(x_bar) + delta_c(x, y_bar; x_bar, y_hat) - lambda (c(x, y_bar) - c(x_bar, y_bar))`.
/// The semi-local mode tests convexity of `g - lambda c(., y_hat)` along
/// c-segments based at `y_hat`.
pub fn check_cross_concavity(
    g: &ObjectiveRef,
    c: &CostRef,
    lambda: f64,
    mode: ConvexityMode,
    samples: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport> {
    check_lambda(lambda)?;
    let name = match mode {
        ConvexityMode::Direct => "cross_concavity",
        ConvexityMode::Semilocal => "cross_concavity_semilocal",
        ConvexityMode::Necessary => {
            return Err(Error::InvalidParameter("no necessary-condition mode for cross-concavity".into()))
        }
    };
    let mut report = PropertyReport::new(name, samples, cfg.seed);
    let eval = |i: usize| -> Result<Vec<Outcome>> {
        let mut r = sample_stream(cfg.seed, TAG_CROSS_CONCAVITY, i);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let x_bar = rng::uniform_in_box(&mut r, &cfg.bounds);
        let (y_bar, y_hat) = anchors(c, &x_bar, &g.gradient(&x_bar)?)?;
        if mode == ConvexityMode::Semilocal {
            let seg = c_segment(c.as_ref(), &x_bar, &x, &y_hat)?;
            let conv = convexity_along_segment(|p| Ok(g.value(p)? - lambda * c.value(p, &y_hat)?), &seg)?;
            return Ok(vec![Outcome { witness: vec![x, x_bar, y_hat], lhs: -conv.min_second_difference, rhs: 0.0, tol: conv.tolerance }]);
        }
        let delta = cross_difference(c.as_ref(), &x, &y_bar, &x_bar, &y_hat)?;
        let strong = lambda * (c.value(&x, &y_bar)? - c.value(&x_bar, &y_bar)?);
        let lhs = -g.value(&x)?;
        let rhs = -g.value(&x_bar)? + delta - strong;
        Ok(vec![Outcome::scaled(vec![x, x_bar, y_bar, y_hat], lhs, rhs)])
    };
    collect(&mut report, cfg.execution, samples, eval)?;
    Ok(report)
}

/// Expected sign of the cross-curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureExpectation {
    /// `|S_c| <= tol`.
    Zero,
    /// `S_c >= -tol`.
    NonNegative,
}

fn curvature_outcome(expect: CurvatureExpectation, value: f64, tol: f64, witness: Vec<Point>) -> Outcome {
    let lhs = match expect {
        CurvatureExpectation::Zero => value.abs(),
        CurvatureExpectation::NonNegative => -value,
    };
    Outcome { witness, lhs, rhs: 0.0, tol }
}

fn curvature_report<F>(name: &str, expect: CurvatureExpectation, tol: f64, samples: usize, seed: u64, exec: Execution, eval: F) -> Result<PropertyReport>
where
    F: Fn(usize) -> Result<(Vec<Point>, crate::geometry::CrossCurvature)> + Sync + Send,
{
    let mut report = PropertyReport::new(name, samples, seed);
    let results = map_indexed(exec, samples, eval);
    let mut flagged = 0;
    let mut noise = 0.0_f64;
    for (i, res) in results.into_iter().enumerate() {
        let (witness, s) = res?;
        flagged += usize::from(s.flagged);
        noise = noise.max(s.noise_floor);
        let o = curvature_outcome(expect, s.value, tol, witness);
        let w: Vec<&Point> = o.witness.iter().collect();
        report.record(i, &w, o.lhs, o.rhs, o.tol);
    }
    report.noise_floor = report.noise_floor.max(noise);
    if flagged > 0 {
        report.notes.push(format!("{flagged} samples within ten times their noise floor"));
    }
    Ok(report)
}

/// Samples `S_c(x, y)(xi, eta)` with `x` in the primal box, `y` in the dual
/// box and unit directions.
pub fn check_cross_curvature(
    c: &CostRef,
    expect: CurvatureExpectation,
    tol: f64,
    samples: usize,
    cfg: &SearchConfig,
) -> Result<PropertyReport> {
    let name = format!("cross_curvature_{}", c.name());
    curvature_report(&name, expect, tol, samples, cfg.seed, cfg.execution, |i| {
        let mut r = sample_stream(cfg.seed, TAG_CURVATURE, i);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let y = rng::uniform_in_box(&mut r, cfg.dual_box());
        let xi = rng::unit_vector(&mut r, c.dim_x());
        let eta = rng::unit_vector(&mut r, c.dim_y());
        let s = cross_curvature(c.as_ref(), &x, &y, &xi, &eta)?;
        Ok((vec![x, y, xi, eta], s))
    })
}

/// Samples the cross-curvature of `L/2 d^2` on the unit sphere in
/// `R^dim` at pairs at most `max_angle` apart, with unit tangent directions.
pub fn check_sphere_cross_curvature(
    dim: usize,
    l: f64,
    max_angle: f64,
    expect: CurvatureExpectation,
    tol: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<PropertyReport> {
    if !(max_angle > 0.0 && max_angle < std::f64::consts::PI) {
        return Err(Error::InvalidParameter("maximum angle must lie in (0, pi)".into()));
    }
    let tangent = |r: &mut rand_chacha::ChaCha8Rng, p: &Point| -> Point {
        loop {
            let v = rng::normal_vector(r, dim);
            let t = &v - p * p.dot(&v);
            if t.norm() > 1e-6 {
                return t.normalize();
            }
        }
    };
    curvature_report("cross_curvature_sphere", expect, tol, samples, seed, exec, |i| {
        let mut r = sample_stream(seed, TAG_CURVATURE, i);
        let x = rng::unit_vector(&mut r, dim);
        let y = loop {
            let y = rng::unit_vector(&mut r, dim);
            if x.dot(&y).clamp(-1.0, 1.0).acos() <= max_angle {
                break y;
            }
        };
        let xi = tangent(&mut r, &x);
        let eta = tangent(&mut r, &y);
        let s = sphere_cross_curvature(l, &x, &y, &xi, &eta)?;
        Ok((vec![x, y, xi, eta], s))
    })
}
