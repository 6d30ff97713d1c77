//! Rate certificates: pointwise-in-n checks of sublinear and linear bounds
//! on solver traces, plus descent and Lyapunov checks.

use serde::{Deserialize, Serialize};

use super::{check_lambda, scaled, PropertyReport};
use crate::costs::{CostFunction, SphereCost};
use crate::error::{Error, Result};
use crate::geometry::c_exponential;
use crate::linalg::{Matrix, Point};
use crate::objective::ObjectiveRef;
use crate::potential::PotentialRef;
use crate::solvers::{kl_divergence, ConvexSet, SolverKind, SolverTrace};
use crate::transforms::Surrogate;

const CERTIFICATE_TOL: f64 = 1e-9;
const DESCENT_TOL: f64 = 1e-9;
const LYAPUNOV_TOL: f64 = 1e-7;

/// Form of a rate bound `lhs_n <= reference_value + coef * offset / denom(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Alternating minimization, `denom = n`.
    AmSublinear,
    /// Alternating minimization, `coef = lambda`, `denom = Lambda^n - 1`, `Lambda = 1/(1-lambda)`.
    AmLinear,
    /// Descent with a general cost, `denom = n`.
    GdgcSublinear,
    /// Descent with a general cost, `coef = lambda`, `denom = Lambda^n - 1`, `Lambda = 1/(1-lambda)`.
    GdgcLinear,
    /// Forward-backward, `denom = n`.
    FbSublinear,
    /// Forward-backward, `coef = lambda + mu`, `denom = Lambda^n - 1`, `Lambda = (1+mu)/(1-lambda)`.
    FbLinear,
}

impl CertificateKind {
    pub const ALL: [CertificateKind; 6] = [
        CertificateKind::AmSublinear,
        CertificateKind::AmLinear,
        CertificateKind::GdgcSublinear,
        CertificateKind::GdgcLinear,
        CertificateKind::FbSublinear,
        CertificateKind::FbLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::AmSublinear => "am_sublinear",
            CertificateKind::AmLinear => "am_linear",
            CertificateKind::GdgcSublinear => "gdgc_sublinear",
            CertificateKind::GdgcLinear => "gdgc_linear",
            CertificateKind::FbSublinear => "fb_sublinear",
            CertificateKind::FbLinear => "fb_linear",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, CertificateKind::AmLinear | CertificateKind::GdgcLinear | CertificateKind::FbLinear)
    }

    /// Whether traces of `solver` can carry this certificate.
    pub fn accepts(self, solver: SolverKind) -> bool {
        use SolverKind::*;
        match self {
            CertificateKind::AmSublinear | CertificateKind::AmLinear => {
                matches!(solver, AlternatingMin | Sinkhorn | Pocs | LatentEm)
            }
            CertificateKind::GdgcSublinear | CertificateKind::GdgcLinear => matches!(
                solver,
                GdgcExplicit
                    | GdgcSurrogate
                    | GradientDescent
                    | MirrorDescent
                    | NaturalGradient
                    | Newton
                    | RiemannianSphere
                    | LogDivergenceGd
            ),
            CertificateKind::FbSublinear | CertificateKind::FbLinear => solver == ForwardBackward,
        }
    }
}

impl std::str::FromStr for CertificateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown certificate kind {s:?}")))
    }
}

/// Constants of a rate bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub kind: CertificateKind,
    pub reference_value: f64,
    pub offset: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub mu: f64,
}

impl BoundSpec {
    pub fn new(kind: CertificateKind, reference_value: f64, offset: f64) -> Self {
        Self { kind, reference_value, offset, lambda: 0.0, mu: 0.0 }
    }

    pub fn with_rates(mut self, lambda: f64, mu: f64) -> Self {
        self.lambda = lambda;
        self.mu = mu;
        self
    }

    fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        check_lambda(self.mu)?;
        if !self.reference_value.is_finite() || !self.offset.is_finite() {
            return Err(Error::InvalidParameter("bound constants must be finite".into()));
        }
        match self.kind {
            CertificateKind::AmLinear | CertificateKind::GdgcLinear if self.lambda <= 0.0 => {
                Err(Error::InvalidParameter("linear bound needs lambda > 0".into()))
            }
            CertificateKind::FbLinear if self.lambda + self.mu <= 0.0 => {
                Err(Error::InvalidParameter("linear bound needs lambda + mu > 0".into()))
            }
            _ => Ok(()),
        }
    }

    /// Right side of the bound at iteration `n >= 1`.
    pub fn rhs(&self, n: usize) -> f64 {
        let nf = n as f64;
        let extra = match self.kind {
            CertificateKind::AmSublinear | CertificateKind::GdgcSublinear | CertificateKind::FbSublinear => {
                self.offset / nf
            }
            CertificateKind::AmLinear | CertificateKind::GdgcLinear => {
                let big = 1.0 / (1.0 - self.lambda);
                self.lambda * self.offset / (big.powf(nf) - 1.0)
            }
            CertificateKind::FbLinear => {
                let big = (1.0 + self.mu) / (1.0 - self.lambda);
                (self.lambda + self.mu) * self.offset / (big.powf(nf) - 1.0)
            }
        };
        self.reference_value + extra
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub solver: SolverKind,
    pub bound: BoundSpec,
    pub rows: Vec<CertificateRow>,
    pub passed: bool,
    pub first_failure: Option<usize>,
}

/// Checks `objective_n <= bound.rhs(n) + 1e-9 max(1, |lhs|, |rhs|)` for every
/// `1 <= n <= horizon`.
pub fn rate_certificate(trace: &SolverTrace, bound: &BoundSpec) -> Result<RateCertificate> {
    if !bound.kind.accepts(trace.solver) {
        return Err(Error::KindMismatch { kind: bound.kind.name().into(), solver: trace.solver.name().into() });
    }
    bound.validate()?;
    let rows: Vec<CertificateRow> = trace
        .records
        .iter()
        .skip(1)
        .map(|r| {
            let rhs = bound.rhs(r.n);
            let lhs = r.objective;
            CertificateRow { n: r.n, lhs, rhs, pass: lhs <= rhs + scaled(CERTIFICATE_TOL, lhs, rhs) }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.pass).map(|r| r.n);
    Ok(RateCertificate { solver: trace.solver, bound: *bound, rows, passed: first_failure.is_none(), first_failure })
}

fn first_dual(trace: &SolverTrace) -> Result<Point> {
    trace.y(0).ok_or(Error::MissingDualIterates)
}

fn require_kind(kind: CertificateKind, family: &[CertificateKind]) -> Result<()> {
    if family.contains(&kind) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{} is not a bound of this family", kind.name())))
    }
}

/// Alternating minimization against `(x, T(x))`:
/// reference `F(x)`, offset `phi(x, y0) - phi(x0, y0)`.
pub fn am_bound(kind: CertificateKind, phi: &Surrogate, trace: &SolverTrace, x: &Point, lambda: f64) -> Result<BoundSpec> {
    require_kind(kind, &[CertificateKind::AmSublinear, CertificateKind::AmLinear])?;
    let y0 = first_dual(trace)?;
    let x0 = trace.x(0);
    let (_, fx) = phi.argmin_y(x, None)?;
    let phi0 = match trace.records[0].phi {
        Some(v) => v,
        None => phi.phi(&x0, &y0)?,
    };
    let offset = phi.phi(x, &y0)? - phi0;
    Ok(BoundSpec::new(kind, fx, offset).with_rates(lambda, 0.0))
}

/// Descent with a general cost: reference `f(x)`, offset `c(x, y0) - c(x0, y0)`.
pub fn gdgc_bound(
    kind: CertificateKind,
    f: &ObjectiveRef,
    c: &dyn CostFunction,
    trace: &SolverTrace,
    x: &Point,
    lambda: f64,
) -> Result<BoundSpec> {
    require_kind(kind, &[CertificateKind::GdgcSublinear, CertificateKind::GdgcLinear])?;
    let y0 = first_dual(trace)?;
    let offset = c.value(x, &y0)? - c.value(&trace.x(0), &y0)?;
    Ok(BoundSpec::new(kind, f.value(x)?, offset).with_rates(lambda, 0.0))
}

/// Forward-backward: reference `f(x) + g(x)`, offset `c(x, y_bar0)` where
/// `grad_x c(x0, y_bar0) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn fb_bound(
    kind: CertificateKind,
    f: &ObjectiveRef,
    g: Option<&ObjectiveRef>,
    c: &dyn CostFunction,
    trace: &SolverTrace,
    x: &Point,
    lambda: f64,
    mu: f64,
) -> Result<BoundSpec> {
    require_kind(kind, &[CertificateKind::FbSublinear, CertificateKind::FbLinear])?;
    let x0 = trace.x(0);
    let y_bar0 = c_exponential(c, &x0, &Point::zeros(x0.len()))?;
    let reference = f.value(x)? + g.map_or(Ok(0.0), |g| g.value(x))?;
    Ok(BoundSpec::new(kind, reference, c.value(x, &y_bar0)?).with_rates(lambda, mu))
}

/// Alternating projections onto `B` then `C`: reference `d_C(x)^2`, offset `|x - x0|^2`.
pub fn pocs_bound(c_set: &ConvexSet, trace: &SolverTrace, x: &Point) -> Result<BoundSpec> {
    let reference = c_set.distance(x)?.powi(2);
    Ok(BoundSpec::new(CertificateKind::AmSublinear, reference, (x - trace.x(0)).norm_squared()))
}

/// Sinkhorn against a coupling `pi_star` with the target marginals:
/// reference 0, offset `KL(pi_star | gamma_0)` where `gamma_0` is the
/// initial Gibbs coupling.
pub fn sinkhorn_bound(gamma0: &Matrix, pi_star: &Matrix) -> Result<BoundSpec> {
    if gamma0.shape() != pi_star.shape() {
        return Err(Error::DimensionMismatch { expected: gamma0.len(), got: pi_star.len() });
    }
    let offset = kl_divergence(pi_star.transpose().as_slice(), gamma0.transpose().as_slice())?;
    Ok(BoundSpec::new(CertificateKind::AmSublinear, 0.0, offset))
}

/// Natural gradient: reference `f(x)`, offset `u(x0 | x)`.
pub fn natural_gradient_bound(f: &ObjectiveRef, u: &PotentialRef, trace: &SolverTrace, x: &Point) -> Result<BoundSpec> {
    Ok(BoundSpec::new(CertificateKind::GdgcSublinear, f.value(x)?, u.divergence(&trace.x(0), x)?))
}

/// Newton: reference `f_star`, offset `f(x0) - f_star`.
pub fn newton_bound(f: &ObjectiveRef, trace: &SolverTrace, f_star: f64) -> Result<BoundSpec> {
    Ok(BoundSpec::new(CertificateKind::GdgcSublinear, f_star, f.value(&trace.x(0))? - f_star))
}

/// Riemannian descent on the sphere: reference `f(x)`, offset `L d(x, x0)^2 / 2`.
pub fn riemannian_bound(f: &ObjectiveRef, l: f64, trace: &SolverTrace, x: &Point) -> Result<BoundSpec> {
    let sphere = SphereCost { dim: x.len(), l };
    Ok(BoundSpec::new(CertificateKind::GdgcSublinear, f.value(x)?, sphere.value(x, &trace.x(0))?))
}

/// Non-increase of the recorded objective, `obj_{n+1} <= obj_n + tol max(1, |obj_n|)`.
pub fn check_descent(trace: &SolverTrace, tol: f64) -> PropertyReport {
    let mut report = PropertyReport::new("descent", trace.len().saturating_sub(1), 0);
    for (n, w) in trace.records.windows(2).enumerate() {
        report.record(n + 1, &[&trace.x(n + 1)], w[1].objective, w[0].objective, scaled(tol, w[0].objective, w[1].objective));
    }
    report
}

/// Per-step descent `obj_{n+1} <= obj_n - [c(x_n, y_{n+1}) - c(x_{n+1}, y_{n+1})]`
/// and, given `f_star`, the stopping bound
/// `min_{k<n} gap_k <= (obj_0 - f_star) / n`.
pub fn check_descent_gap(trace: &SolverTrace, c: &dyn CostFunction, f_star: Option<f64>) -> Result<PropertyReport> {
    let steps = trace.len().saturating_sub(1);
    let mut report = PropertyReport::new("descent_gap", steps, 0);
    let mut min_gap = f64::INFINITY;
    let obj0 = trace.records.first().map_or(0.0, |r| r.objective);
    for n in 0..steps {
        let y1 = trace.y(n + 1).ok_or(Error::MissingDualIterates)?;
        let (x, x1) = (trace.x(n), trace.x(n + 1));
        let gap = c.value(&x, &y1)? - c.value(&x1, &y1)?;
        let lhs = trace.records[n + 1].objective;
        let rhs = trace.records[n].objective - gap;
        report.record(n, &[&x, &x1, &y1], lhs, rhs, scaled(DESCENT_TOL, lhs, trace.records[n].objective));
        min_gap = min_gap.min(gap);
        if let Some(fs) = f_star {
            let bound = (obj0 - fs) / (n + 1) as f64;
            report.record(n, &[&x], min_gap, bound, scaled(DESCENT_TOL, min_gap, obj0 - fs));
        }
    }
    if f_star.is_none() {
        report.notes.push("no optimal value given; minimum-gap bound skipped".into());
    }
    Ok(report)
}

/// Non-increase of `V_n = n (phi(x_n, y_n) - phi(x, y)) + phi(x, y_n)` along
/// an alternating-minimization trace. The constant offset is omitted since
/// it does not affect monotonicity.
pub fn lyapunov_check(trace: &SolverTrace, phi: &Surrogate, x: &Point, y: &Point) -> Result<PropertyReport> {
    let mut report = PropertyReport::new("lyapunov", trace.len().saturating_sub(1), phi.cfg.seed);
    let phi_ref = phi.phi(x, y)?;
    let values = trace
        .records
        .iter()
        .map(|r| {
            let yn = r.y.clone().map(Point::from_vec).ok_or(Error::MissingDualIterates)?;
            let phi_n = match r.phi {
                Some(v) => v,
                None => phi.phi(&Point::from_vec(r.x.clone()), &yn)?,
            };
            Ok(r.n as f64 * (phi_n - phi_ref) + phi.phi(x, &yn)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    for (n, w) in values.windows(2).enumerate() {
        report.record(n + 1, &[&trace.x(n + 1)], w[1], w[0], scaled(LYAPUNOV_TOL, w[0], w[1]));
    }
    report.notes.push(format!("V_n values: first {:?}, last {:?}", values.first(), values.last()));
    Ok(report)
}
