//! Finite-difference derivatives: central differences with one level of
//! Richardson extrapolation. Non-finite evaluations raise a domain error.

use crate::error::{finite, Result};
use crate::linalg::{Matrix, Point};

/// Default step `1e-4 * (1 + |x|)`.
pub fn default_step(x: &Point) -> f64 {
    1e-4 * (1.0 + x.norm())
}

/// Combines estimates at steps `h` and `h/2` of a second-order scheme.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

fn shifted(x: &Point, i: usize, h: f64) -> Point {
    let mut z = x.clone();
    z[i] += h;
    z
}

/// Gradient of a scalar function.
pub fn fd_gradient<F>(f: F, x: &Point, step: Option<f64>) -> Result<Point>
where
    F: Fn(&Point) -> Result<f64>,
{
    let h = step.unwrap_or_else(|| default_step(x));
    let mut g = Point::zeros(x.len());
    for i in 0..x.len() {
        let d = |h: f64| -> Result<f64> {
            let fp = finite(f(&shifted(x, i, h))?, "function value")?;
            let fm = finite(f(&shifted(x, i, -h))?, "function value")?;
            Ok((fp - fm) / (2.0 * h))
        };
        g[i] = richardson(d(h)?, d(h / 2.0)?);
    }
    Ok(g)
}

/// Jacobian `J[i][j] = d g_i / d x_j` of a vector function.
pub fn fd_jacobian<G>(g: G, x: &Point, step: Option<f64>) -> Result<Matrix>
where
    G: Fn(&Point) -> Result<Point>,
{
    let h = step.unwrap_or_else(|| default_step(x));
    let m = g(x)?.len();
    let mut jac = Matrix::zeros(m, x.len());
    for j in 0..x.len() {
        let d = |h: f64| -> Result<Point> {
            let gp = g(&shifted(x, j, h))?;
            let gm = g(&shifted(x, j, -h))?;
            let col = (gp - gm) / (2.0 * h);
            if col.iter().all(|v| v.is_finite()) {
                Ok(col)
            } else {
                Err(crate::Error::Domain("jacobian column is not finite".into()))
            }
        };
        let coarse = d(h)?;
        let fine = d(h / 2.0)?;
        jac.set_column(j, &((fine * 4.0 - coarse) / 3.0));
    }
    Ok(jac)
}

/// Hessian of a scalar function from values only, symmetrized.
pub fn fd_hessian<F>(f: F, x: &Point, step: Option<f64>) -> Result<Matrix>
where
    F: Fn(&Point) -> Result<f64>,
{
    let h = step.unwrap_or_else(|| default_step(x));
    let d = x.len();
    let f0 = finite(f(x)?, "function value")?;
    let eval = |z: Point| -> Result<f64> { finite(f(&z)?, "function value") };
    let second = |h: f64| -> Result<Matrix> {
        let mut hm = Matrix::zeros(d, d);
        for i in 0..d {
            let fp = eval(shifted(x, i, h))?;
            let fm = eval(shifted(x, i, -h))?;
            hm[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let pp = eval(shifted(&shifted(x, i, h), j, h))?;
                let pm = eval(shifted(&shifted(x, i, h), j, -h))?;
                let mp = eval(shifted(&shifted(x, i, -h), j, h))?;
                let mm = eval(shifted(&shifted(x, i, -h), j, -h))?;
                let v = (pp - pm - mp + mm) / (4.0 * h * h);
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        Ok(hm)
    };
    let coarse = second(h)?;
    let fine = second(h / 2.0)?;
    let r = (fine * 4.0 - coarse) / 3.0;
    Ok(crate::linalg::symmetrize(&r))
}

/// Mixed second derivatives `M[i][j] = d^2 c / dx_i dy_j` from values only.
pub fn fd_mixed_hessian<C>(c: C, x: &Point, y: &Point, step: Option<f64>) -> Result<Matrix>
where
    C: Fn(&Point, &Point) -> Result<f64>,
{
    let h = step.unwrap_or_else(|| 1e-4 * (1.0 + x.norm() + y.norm()));
    let eval = |a: Point, b: Point| -> Result<f64> { finite(c(&a, &b)?, "cost value") };
    let mixed = |h: f64| -> Result<Matrix> {
        let mut m = Matrix::zeros(x.len(), y.len());
        for i in 0..x.len() {
            for j in 0..y.len() {
                let pp = eval(shifted(x, i, h), shifted(y, j, h))?;
                let pm = eval(shifted(x, i, h), shifted(y, j, -h))?;
                let mp = eval(shifted(x, i, -h), shifted(y, j, h))?;
                let mm = eval(shifted(x, i, -h), shifted(y, j, -h))?;
                m[(i, j)] = (pp - pm - mp + mm) / (4.0 * h * h);
            }
        }
        Ok(m)
    };
    let coarse = mixed(h)?;
    let fine = mixed(h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Relative discrepancy `|a - b|_max / max(1, |a|_max)`.
pub fn relative_error(a: &Matrix, b: &Matrix) -> f64 {
    let scale = crate::linalg::max_abs(a).max(1.0);
    crate::linalg::max_abs(&(a - b)) / scale
}
