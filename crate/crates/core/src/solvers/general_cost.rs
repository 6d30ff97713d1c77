use super::{SolverKind, SolverSpec, SolverTrace};
use crate::costs::CostRef;
use crate::error::{Error, Result};
use crate::geometry::{c_exponential, x_argmin};
use crate::linalg::Point;
use crate::objective::ObjectiveRef;
use crate::optim::newton_root;
use crate::transforms::{SearchConfig, Surrogate};

/// `y_0` with `grad_x c(x_0, y_0) = 0`, when it exists.
fn base_dual(c: &CostRef, x0: &Point) -> Option<Point> {
    c_exponential(c.as_ref(), x0, &Point::zeros(x0.len())).ok()
}

/// Explicit form: `y_{n+1}` solves `-grad_x c(x_n, y) = grad f(x_n)` and
/// `x_{n+1} = argmin_x c(x, y_{n+1})`.
pub fn gdgc_explicit(f: &ObjectiveRef, c: &CostRef, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let mut trace = SolverTrace::new(SolverKind::GdgcExplicit, c.name());
    let mut x = x0.clone();
    let mut y = base_dual(c, x0);
    let mut phi = None;
    for n in 0..=spec.horizon {
        let fx = f.value(&x)?;
        trace.push(&x, y.as_ref(), fx, phi);
        if n == spec.horizon {
            break;
        }
        let y_next = c_exponential(c.as_ref(), &x, &-f.gradient(&x)?)?;
        let x_next = x_argmin(c.as_ref(), &y_next, Some(&x))?;
        let gap = c.value(&x, &y_next)? - c.value(&x_next, &y_next)?;
        trace.set_gap(n, gap);
        phi = Some(fx - gap);
        x = x_next;
        y = Some(y_next);
    }
    Ok(trace)
}

/// Surrogate form: alternating minimization of `c(x, y) + f^c(y)` with the
/// c-transform computed numerically.
pub fn gdgc_surrogate(
    f: &ObjectiveRef,
    c: &CostRef,
    x0: &Point,
    spec: &SolverSpec,
    cfg: &SearchConfig,
) -> Result<SolverTrace> {
    let s = Surrogate::c_transform_surrogate(c.clone(), f.clone(), cfg.clone());
    let mut trace = SolverTrace::new(SolverKind::GdgcSurrogate, c.name());
    let mut x = x0.clone();
    let mut y = base_dual(c, x0);
    let mut phi = None;
    for n in 0..=spec.horizon {
        let fx = f.value(&x)?;
        trace.push(&x, y.as_ref(), fx, phi);
        if n == spec.horizon {
            break;
        }
        let (y_next, f_x) = s.argmin_y(&x, y.as_ref())?;
        let x_next = s.argmin_x(&y_next, Some(&x))?;
        let gap = c.value(&x, &y_next)? - c.value(&x_next, &y_next)?;
        trace.set_gap(n, gap);
        phi = Some(f_x - gap);
        x = x_next;
        y = Some(y_next);
    }
    Ok(trace)
}

/// Forward step along the c-exponential of `-grad f`, backward step
/// solving `-grad_x c(x, y_{n+1}) = grad g(x)`. With `g = None` this is
/// exactly [`gdgc_explicit`].
pub fn forward_backward(
    f: &ObjectiveRef,
    g: Option<&ObjectiveRef>,
    c: &CostRef,
    x0: &Point,
    spec: &SolverSpec,
    cfg: &SearchConfig,
) -> Result<SolverTrace> {
    let mut trace = SolverTrace::new(SolverKind::ForwardBackward, c.name());
    let big_f = |x: &Point| -> Result<f64> { Ok(f.value(x)? + g.map_or(Ok(0.0), |g| g.value(x))?) };
    let mut x = x0.clone();
    let mut y = base_dual(c, x0);
    let mut phi = None;
    for n in 0..=spec.horizon {
        let fx = big_f(&x)?;
        trace.push(&x, y.as_ref(), fx, phi);
        if n == spec.horizon {
            break;
        }
        let y_next = c_exponential(c.as_ref(), &x, &-f.gradient(&x)?)?;
        let x_next = match g {
            None => x_argmin(c.as_ref(), &y_next, Some(&x))?,
            Some(g) => backward_step(c, g, &y_next, &x, spec, cfg)?,
        };
        let gap = c.value(&x, &y_next)? - c.value(&x_next, &y_next)?;
        trace.set_gap(n, gap);
        let g_now = g.map_or(Ok(0.0), |g| g.value(&x))?;
        let g_next = g.map_or(Ok(0.0), |g| g.value(&x_next))?;
        phi = Some(fx - g_now - gap + g_next);
        x = x_next;
        y = Some(y_next);
    }
    Ok(trace)
}

fn backward_step(
    c: &CostRef,
    g: &ObjectiveRef,
    y: &Point,
    start: &Point,
    spec: &SolverSpec,
    cfg: &SearchConfig,
) -> Result<Point> {
    let newton = newton_root(
        |x| Ok(c.grad_x(x, y)? + g.gradient(x)?),
        |x| Ok(c.hess_xx(x, y)? + g.hessian(x)?),
        start,
        spec.backward_tol,
        spec.backward_max_iter,
        "backward step",
    );
    if let Ok(x) = newton {
        return Ok(x);
    }
    let s = Surrogate::split(c.clone(), Some(g.clone()), None, cfg.clone());
    s.argmin_x(y, Some(start))
        .map_err(|e| Error::InnerSolveFailure(format!("backward step: {e}")))
}
