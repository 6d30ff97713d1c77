use super::{SolverKind, SolverSpec, SolverTrace};
use crate::error::{Error, Result};
use crate::geometry::c_exponential;
use crate::linalg::Point;
use crate::transforms::Surrogate;

/// Point `y_0` with `x_0 = S(y_0)`, i.e. `-grad_x c(x_0, y_0) = grad g(x_0)`.
fn dual_anchor(phi: &Surrogate, x0: &Point) -> Option<Point> {
    let xi = match &phi.g {
        Some(g) => g.gradient(x0).ok()?,
        None => Point::zeros(x0.len()),
    };
    let y0 = c_exponential(phi.cost.as_ref(), x0, &xi).ok()?;
    let r = phi.grad_x_phi(x0, &y0).ok()?;
    (r.amax() <= 1e-8 * (1.0 + xi.amax())).then_some(y0)
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * a.abs().max(b.abs()).max(1.0)
}

/// Alternates `y_{n+1} = T(x_n)` and `x_{n+1} = S(y_{n+1})`, asserting that
/// `phi` never increases.
pub fn alternating_minimize(phi: &Surrogate, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let mut trace = SolverTrace::new(SolverKind::AlternatingMin, phi.cost.name());
    let y0 = dual_anchor(phi, x0);
    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut phi_xy = match &y0 {
        Some(y0) => Some(phi.phi(x0, y0)?),
        None => None,
    };
    let mut pending: Option<(f64, f64)> = None;
    for n in 0..=spec.horizon {
        let (y_next, f_x) = phi.argmin_y(&x, y.as_ref())?;
        if let Some(p) = phi_xy {
            if !within(f_x, p, spec.monotone_tol) {
                return Err(Error::MonotonicityViolation { step: n, before: p, after: f_x });
            }
        }
        if let Some((before, after)) = pending.take() {
            trace.set_gap(n - 1, before - after);
        }
        trace.push(&x, y.as_ref(), phi_xy.unwrap_or(f_x), phi_xy);
        if n == spec.horizon {
            break;
        }
        let x_next = phi.argmin_x(&y_next, Some(&x))?;
        let dual = f_x - phi.cost.value(&x, &y_next)? - phi.primal_term(&x)?;
        let phi_next = phi.cost.value(&x_next, &y_next)? + phi.primal_term(&x_next)? + dual;
        if !within(phi_next, f_x, spec.monotone_tol) {
            return Err(Error::MonotonicityViolation { step: n + 1, before: f_x, after: phi_next });
        }
        pending = Some((f_x, phi_next));
        x = x_next;
        y = Some(y_next);
        phi_xy = Some(phi_next);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::quadratic_cost;
    use crate::linalg::point;
    use crate::objective::{ObjectiveRef, QuadraticObjective};
    use crate::transforms::SearchConfig;
    use std::sync::Arc;

    #[test]
    fn quadratic_split_surrogate_halves_each_step() {
        let h: ObjectiveRef = Arc::new(QuadraticObjective::isotropic(1, 1.0));
        let s = Surrogate::split(quadratic_cost(1, 1.0), None, Some(h), SearchConfig::cube(1, -2.0, 2.0));
        let t = alternating_minimize(&s, &point(&[1.0]), &SolverSpec::horizon(3)).unwrap();
        assert!((t.y(1).unwrap()[0] - 0.5).abs() < 1e-9);
        assert!((t.x(1)[0] - 0.5).abs() < 1e-9);
        assert!((t.x(3)[0] - 0.125).abs() < 1e-9);
        for w in t.records.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-12);
        }
    }
}
