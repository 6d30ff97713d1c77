//! Local solvers used by the geometry, transform and solver modules:
//! damped Newton for roots, damped Newton and BFGS for minimization.

use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix, Point};

/// Outcome of a local minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Point,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Newton for `r(x) = 0` with merit `|r|^2`. Points where `r` errors
/// are treated as infeasible and the step is shortened.
pub fn newton_root<R, J>(residual: R, jacobian: J, x0: &Point, tol: f64, max_iter: usize, what: &str) -> Result<Point>
where
    R: Fn(&Point) -> Result<Point>,
    J: Fn(&Point) -> Result<Matrix>,
{
    let mut x = x0.clone();
    let mut r = residual(&x)?;
    for _ in 0..max_iter {
        let norm = r.norm();
        if norm <= tol {
            return Ok(x);
        }
        let step = solve(&jacobian(&x)?, &r)?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-10 {
            let cand = &x - &step * t;
            if let Ok(rc) = residual(&cand) {
                if rc.iter().all(|v| v.is_finite()) && rc.norm() <= (1.0 - 1e-4 * t) * norm {
                    x = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r.norm() <= tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence { what: what.into(), iterations: max_iter })
    }
}

/// Damped Newton minimization with a gradient-step fallback when the
/// Hessian is not positive definite.
pub fn newton_minimize<F, G, H>(f: F, grad: G, hess: H, x0: &Point, tol: f64, max_iter: usize) -> Result<Minimum>
where
    F: Fn(&Point) -> Result<f64>,
    G: Fn(&Point) -> Result<Point>,
    H: Fn(&Point) -> Result<Matrix>,
{
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut iterations = 0;
    while iterations < max_iter {
        if g.amax() <= tol {
            break;
        }
        iterations += 1;
        let p = match hess(&x).ok().and_then(|h| h.cholesky()) {
            Some(ch) => -ch.solve(&g),
            None => -&g,
        };
        let slope = g.dot(&p);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-14 {
            let cand = &x + &p * t;
            if let Ok(fc) = f(&cand) {
                if fc.is_finite() && fc <= fx + 1e-4 * t * slope {
                    x = cand;
                    fx = fc;
                    g = grad(&x)?;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let grad_norm = g.amax();
    Ok(Minimum { point: x, value: fx, grad_norm, iterations, converged: grad_norm <= tol })
}

/// BFGS with Armijo backtracking. Values below `-ceiling` abort with
/// [`Error::Unbounded`].
pub fn bfgs<F, G>(f: F, grad: G, x0: &Point, tol: f64, max_iter: usize, ceiling: f64) -> Result<Minimum>
where
    F: Fn(&Point) -> Result<f64>,
    G: Fn(&Point) -> Result<Point>,
{
    let d = x0.len();
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    let mut g = grad(&x)?;
    let mut hinv = Matrix::identity(d, d);
    let mut fresh = true;
    let mut iterations = 0;
    while iterations < max_iter {
        if g.amax() <= tol {
            break;
        }
        iterations += 1;
        let mut p = -(&hinv * &g);
        if g.dot(&p) >= 0.0 {
            hinv = Matrix::identity(d, d);
            fresh = true;
            p = -&g;
        }
        let slope = g.dot(&p);
        let mut t = 1.0;
        let mut next = None;
        while t > 1e-16 {
            let cand = &x + &p * t;
            if let Ok(fc) = f(&cand) {
                if fc.is_finite() && fc <= fx + 1e-4 * t * slope {
                    next = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fxn)) = next else {
            if !fresh {
                hinv = Matrix::identity(d, d);
                fresh = true;
                continue;
            }
            break;
        };
        if fxn < -ceiling {
            return Err(Error::Unbounded(ceiling));
        }
        let gn = grad(&xn)?;
        let s = &xn - &x;
        let yv = &gn - &g;
        let sy = s.dot(&yv);
        let stalled = (fx - fxn).abs() <= 1e-16 * (1.0 + fx.abs()) && s.amax() <= 1e-15 * (1.0 + x.amax());
        x = xn;
        fx = fxn;
        g = gn;
        if stalled {
            break;
        }
        if sy > 1e-14 * s.norm() * yv.norm() {
            if fresh {
                hinv = Matrix::identity(d, d) * (sy / yv.norm_squared());
                fresh = false;
            }
            let rho = 1.0 / sy;
            let i = Matrix::identity(d, d);
            let a = &i - &s * yv.transpose() * rho;
            let b = &i - &yv * s.transpose() * rho;
            hinv = &a * &hinv * &b + &s * s.transpose() * rho;
        }
    }
    let grad_norm = g.amax();
    Ok(Minimum { point: x, value: fx, grad_norm, iterations, converged: grad_norm <= tol })
}
