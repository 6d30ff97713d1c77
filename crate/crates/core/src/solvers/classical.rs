//! Classical first- and second-order methods, each an instance of descent
//! with a general cost.

use super::{SolverKind, SolverSpec, SolverTrace};
use crate::costs::{CostFunction, SphereCost};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Point};
use crate::objective::ObjectiveRef;
use crate::potential::PotentialRef;

fn check_horizon_loop<F>(mut trace: SolverTrace, x0: &Point, spec: &SolverSpec, f: &ObjectiveRef, mut step: F) -> Result<SolverTrace>
where
    F: FnMut(&Point) -> Result<(Point, f64)>,
{
    let mut x = x0.clone();
    let mut y = Some(x0.clone());
    for n in 0..=spec.horizon {
        let fx = f.value(&x)?;
        trace.push(&x, y.as_ref(), fx, None);
        if n == spec.horizon {
            break;
        }
        let (x_next, gap) = step(&x)?;
        trace.set_gap(n, gap);
        x = x_next;
        y = Some(x.clone());
    }
    Ok(trace)
}

/// `x_{n+1} = x_n - grad f(x_n) / L`.
pub fn gradient_descent(f: &ObjectiveRef, l: f64, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    if l <= 0.0 {
        return Err(Error::InvalidParameter("smoothness constant must be positive".into()));
    }
    let trace = SolverTrace::new(SolverKind::GradientDescent, format!("L={l}"));
    check_horizon_loop(trace, x0, spec, f, |x| {
        let xn = x - f.gradient(x)? / l;
        let gap = 0.5 * l * (x - &xn).norm_squared();
        Ok((xn, gap))
    })
}

/// `grad u(x_{n+1}) = grad u(x_n) - grad f(x_n)`.
pub fn mirror_descent(f: &ObjectiveRef, u: &PotentialRef, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let trace = SolverTrace::new(SolverKind::MirrorDescent, u.name());
    check_horizon_loop(trace, x0, spec, f, |x| {
        let xn = u.grad_inverse(&(u.gradient(x)? - f.gradient(x)?))?;
        let gap = u.divergence(x, &xn)?;
        Ok((xn, gap))
    })
}

/// `x_{n+1} = x_n - hess u(x_n)^{-1} grad f(x_n)`. The dual view records
/// `grad u(x_n)`.
pub fn natural_gradient(f: &ObjectiveRef, u: &PotentialRef, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let trace = SolverTrace::new(SolverKind::NaturalGradient, u.name());
    let mut trace = check_horizon_loop(trace, x0, spec, f, |x| {
        let xn = x - solve_spd(&u.hessian(x)?, &f.gradient(x)?)?;
        if !u.in_domain(&xn) {
            return Err(Error::Domain("natural gradient step leaves the domain of u".into()));
        }
        let gap = u.divergence(&xn, x)?;
        Ok((xn, gap))
    })?;
    let dual = trace
        .records
        .iter()
        .map(|r| Ok(u.gradient(&Point::from_vec(r.x.clone()))?.as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    trace.dual_view = Some(dual);
    Ok(trace)
}

/// `x_{n+1} = x_n - hess f(x_n)^{-1} grad f(x_n)`.
pub fn newton(f: &ObjectiveRef, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let trace = SolverTrace::new(SolverKind::Newton, f.name());
    check_horizon_loop(trace, x0, spec, f, |x| {
        let g = f.gradient(x)?;
        let xn = x - solve_spd(&f.hessian(x)?, &g)?;
        let gap = f.value(&xn)? - f.value(x)? - g.dot(&(&xn - x));
        Ok((xn, gap))
    })
}

/// `x_{n+1} = exp_{x_n}(-grad f(x_n) / L)` on the unit sphere, with the
/// Euclidean gradient projected to the tangent space.
pub fn riemannian_sphere_gd(f: &ObjectiveRef, l: f64, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    if ((x0.norm() - 1.0).abs()) > 1e-12 {
        return Err(Error::Domain("starting point must lie on the unit sphere".into()));
    }
    let sphere = SphereCost { dim: x0.len(), l };
    let trace = SolverTrace::new(SolverKind::RiemannianSphere, format!("L={l}"));
    check_horizon_loop(trace, x0, spec, f, |x| {
        let g = f.gradient(x)?;
        let v = -(&g - x * x.dot(&g)) / l;
        if v.norm() >= std::f64::consts::PI {
            return Err(Error::Domain("step reaches the cut locus".into()));
        }
        let xn = SphereCost::exp_map(x, &v);
        let gap = sphere.value(x, &xn)?;
        Ok((xn, gap))
    })
}

/// Root `mu` of `alpha mu <(grad u)^{-1}(mu g) - x, g> - mu + 1 = 0`, the
/// first sign change of the left side scanning up from zero.
pub fn log_divergence_step_size(u: &PotentialRef, alpha: f64, x: &Point, g: &Point) -> Result<f64> {
    let eq = |mu: f64| -> Result<f64> {
        let z = u.grad_inverse(&(g * mu))?;
        Ok(alpha * mu * (z - x).dot(g) - mu + 1.0)
    };
    let mut lo = 0.0;
    let mut f_lo = eq(0.0).unwrap_or(1.0);
    let mut hi = None;
    let grid = (1..=200).map(|k| k as f64 * 0.01).chain((1..=40).map(|k| 2f64.powi(k + 1)));
    for mu in grid {
        let Ok(v) = eq(mu) else { continue };
        if v <= 0.0 {
            hi = Some((mu, v));
            break;
        }
        lo = mu;
        f_lo = v;
    }
    let (mut hi, mut f_hi) = hi.ok_or(Error::NoRoot)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = if (hi - lo) > 1e-3 { 0.5 * (lo + hi) } else { lo - f_lo * (hi - lo) / (f_hi - f_lo) };
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        let v = eq(mid)?;
        if v == 0.0 || (hi - lo) <= 1e-15 * hi.abs().max(1.0) {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
            f_lo = v;
        } else {
            hi = mid;
            f_hi = v;
        }
        if v.abs() < 1e-15 {
            return Ok(mid);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `grad u(x_{n+1}) = mu_n (grad u(x_n) - grad f(x_n))` with `mu_n` from
/// [`log_divergence_step_size`].
pub fn log_divergence_gd(
    f: &ObjectiveRef,
    u: &PotentialRef,
    alpha: f64,
    x0: &Point,
    spec: &SolverSpec,
) -> Result<SolverTrace> {
    let cost = crate::costs::LogDivergenceCost::new(u.clone(), alpha)?;
    let trace = SolverTrace::new(SolverKind::LogDivergenceGd, cost.name());
    check_horizon_loop(trace, x0, spec, f, |x| {
        let gh = u.gradient(x)? - f.gradient(x)?;
        let mu = log_divergence_step_size(u, alpha, x, &gh)?;
        let xn = u.grad_inverse(&(gh * mu))?;
        let gap = cost.value(x, &xn)?;
        Ok((xn, gap))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::objective::{LinearObjective, QuadraticObjective};
    use crate::potential::{NegativeEntropy, QuadraticPotential, SumExp};
    use std::sync::Arc;

    #[test]
    fn mirror_descent_with_entropy_is_multiplicative() {
        let f: ObjectiveRef = Arc::new(LinearObjective { slope: point(&[1.0]), offset: 0.0 });
        let u: PotentialRef = Arc::new(NegativeEntropy { dim: 1 });
        let t = mirror_descent(&f, &u, &point(&[1.0]), &SolverSpec::horizon(1)).unwrap();
        assert!((t.x(1)[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn newton_on_sum_exp_moves_by_one() {
        let f: ObjectiveRef = Arc::new(SumExp { dim: 1, ridge: 0.0 });
        let t = newton(&f, &point(&[0.0]), &SolverSpec::horizon(1)).unwrap();
        assert!((t.x(1)[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_divergence_step_reaches_minimizer_of_matched_quadratic() {
        let f: ObjectiveRef = Arc::new(QuadraticObjective::isotropic(1, 1.0));
        let u: PotentialRef = Arc::new(QuadraticPotential::new(1, 1.0));
        let t = log_divergence_gd(&f, &u, 0.5, &point(&[1.0]), &SolverSpec::horizon(1)).unwrap();
        assert!(t.x(1)[0].abs() < 1e-15);
    }

    #[test]
    fn step_size_matches_quadratic_formula() {
        let u: PotentialRef = Arc::new(QuadraticPotential::new(2, 2.0));
        let (alpha, x, g) = (0.3, point(&[0.5, -1.0]), point(&[0.8, 0.4]));
        let mu = log_divergence_step_size(&u, alpha, &x, &g).unwrap();
        let a = alpha * g.norm_squared() / 2.0;
        let b = 1.0 + alpha * x.dot(&g);
        let expected = 2.0 / (b + (b * b - 4.0 * a).sqrt());
        assert!((mu - expected).abs() < 1e-13, "{mu} vs {expected}");
    }

    #[test]
    fn sphere_iterates_stay_on_sphere() {
        let f: ObjectiveRef = Arc::new(LinearObjective { slope: point(&[0.0, 0.0, 1.0]), offset: 0.0 });
        let x0 = point(&[1.0, 0.0, 0.0]);
        let t = riemannian_sphere_gd(&f, 1.0, &x0, &SolverSpec::horizon(50)).unwrap();
        for n in 0..=50 {
            assert!((t.x(n).norm() - 1.0).abs() < 1e-12);
        }
        assert!((t.x(50) - point(&[0.0, 0.0, -1.0])).amax() < 1e-6);
    }
}
