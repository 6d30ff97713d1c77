//! Cost-induced geometry: cross-differences, the Kim-McCann metric,
//! c-exponentials, horizontal c-segments and cross-curvature.

use crate::costs::{CostFunction, SphereCost};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{orthogonal_complement, solve, Matrix, Point};
use crate::optim::{newton_minimize, newton_root};

/// `c(x, y') + c(x', y) - c(x, y) - c(x', y')`.
pub fn cross_difference(c: &dyn CostFunction, xp: &Point, yp: &Point, x: &Point, y: &Point) -> Result<f64> {
    Ok(c.value(x, yp)? + c.value(xp, y)? - c.value(x, y)? - c.value(xp, yp)?)
}

/// `-xi^T hess_xy(x, y) eta`.
pub fn kim_mccann_metric(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Result<f64> {
    check_dim(c.dim_x(), xi.len())?;
    check_dim(c.dim_y(), eta.len())?;
    Ok(-xi.dot(&(c.hess_xy(x, y)? * eta)))
}

/// The `y` solving `-grad_x c(x, y) = xi`.
pub fn c_exponential(c: &dyn CostFunction, x: &Point, xi: &Point) -> Result<Point> {
    if let Some(y) = c.c_exp_closed(x, xi) {
        return y;
    }
    c_exponential_from(c, x, xi, &c.dual_guess(x))
}

/// Damped Newton for the c-exponential from the starting guess `y0`.
pub fn c_exponential_from(c: &dyn CostFunction, x: &Point, xi: &Point, y0: &Point) -> Result<Point> {
    check_dim(c.dim_x(), xi.len())?;
    if c.dim_x() != c.dim_y() {
        return Err(Error::InvalidParameter("c-exponential needs dim X = dim Y".into()));
    }
    let tol = 1e-10 * (1.0 + xi.norm());
    newton_root(|y| Ok(c.grad_x(x, y)? + xi), |y| c.hess_xy(x, y), y0, tol, 100, "c-exponential")
}

/// `argmin_x c(x, y)`, from a closed form when available.
pub fn x_argmin(c: &dyn CostFunction, y: &Point, start: Option<&Point>) -> Result<Point> {
    if let Some(x) = c.x_argmin_closed(y) {
        return x;
    }
    let x0 = match start {
        Some(s) => s.clone(),
        None if c.dim_x() == c.dim_y() => y.clone(),
        None => Point::zeros(c.dim_x()),
    };
    let m = newton_minimize(|x| c.value(x, y), |x| c.grad_x(x, y), |x| c.hess_xx(x, y), &x0, 1e-11, 200)?;
    if m.converged {
        Ok(m.point)
    } else {
        Err(Error::NoConvergence { what: "argmin_x c(x, y)".into(), iterations: m.iterations })
    }
}

/// A horizontal c-segment `t -> (x(t), y)` sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct CSegment {
    pub y: Point,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
    pub closed_form: bool,
}

pub const SEGMENT_STEPS: usize = 64;
const SHOOTING_CORRECTIONS: usize = 30;

/// `d/ds [hess_xy(x(s), y)^T] v` along `x(s) = x + s v`.
fn transport_term(c: &dyn CostFunction, x: &Point, y: &Point, v: &Point) -> Result<Point> {
    if let Some(a) = c.third_xx_y(x, y, v) {
        return a;
    }
    let n = v.norm();
    if n == 0.0 {
        return Ok(Point::zeros(y.len()));
    }
    let h = 1e-4 * (1.0 + x.norm()) / n;
    let d = |h: f64| -> Result<Point> {
        let p = c.hess_xy(&(x + v * h), y)?.transpose() * v;
        let m = c.hess_xy(&(x - v * h), y)?.transpose() * v;
        Ok((p - m) / (2.0 * h))
    };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

fn acceleration(c: &dyn CostFunction, x: &Point, y: &Point, v: &Point) -> Result<Point> {
    let a = transport_term(c, x, y, v)?;
    Ok(-solve(&c.hess_xy(x, y)?.transpose(), &a)?)
}

/// Integrates the horizontal segment equation with RK4 from `x0` with
/// velocity `v0` up to time `t_end`, returning `steps + 1` samples.
pub fn c_segment_ivp(c: &dyn CostFunction, x0: &Point, v0: &Point, y: &Point, t_end: f64, steps: usize) -> Result<Vec<Point>> {
    let dt = t_end / steps as f64;
    let (mut x, mut v) = (x0.clone(), v0.clone());
    let mut out = vec![x.clone()];
    for _ in 0..steps {
        let k1x = v.clone();
        let k1v = acceleration(c, &x, y, &v)?;
        let x2 = &x + &k1x * (dt / 2.0);
        let v2 = &v + &k1v * (dt / 2.0);
        let k2v = acceleration(c, &x2, y, &v2)?;
        let x3 = &x + &v2 * (dt / 2.0);
        let v3 = &v + &k2v * (dt / 2.0);
        let k3v = acceleration(c, &x3, y, &v3)?;
        let x4 = &x + &v3 * dt;
        let v4 = &v + &k3v * dt;
        let k4v = acceleration(c, &x4, y, &v4)?;
        x += (&k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
        v += (&k1v + &k2v * 2.0 + &k3v * 2.0 + &k4v) * (dt / 6.0);
        if !x.iter().chain(v.iter()).all(|z| z.is_finite()) {
            return Err(Error::ShootingFailure("trajectory diverged".into()));
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// The horizontal c-segment from `x0` to `x1` with `y` fixed: closed form
/// when the cost provides one, otherwise RK4 shooting.
pub fn c_segment(c: &dyn CostFunction, x0: &Point, x1: &Point, y: &Point) -> Result<CSegment> {
    check_dim(c.dim_x(), x0.len())?;
    check_dim(c.dim_x(), x1.len())?;
    let times: Vec<f64> = (0..=SEGMENT_STEPS).map(|k| k as f64 / SEGMENT_STEPS as f64).collect();
    if c.segment_closed(x0, x1, y, 0.0).is_some() {
        let points = times
            .iter()
            .map(|&t| c.segment_closed(x0, x1, y, t).expect("closed form"))
            .collect::<Result<Vec<_>>>()?;
        return Ok(CSegment { y: y.clone(), times, points, closed_form: true });
    }
    let endpoint = |v: &Point| -> Result<Point> {
        Ok(c_segment_ivp(c, x0, v, y, 1.0, SEGMENT_STEPS)?.pop().expect("nonempty"))
    };
    let tol = 1e-9 * (1.0 + (x1 - x0).norm());
    let mut v = x1 - x0;
    for _ in 0..=SHOOTING_CORRECTIONS {
        let miss = endpoint(&v)? - x1;
        if miss.norm() <= tol {
            let points = c_segment_ivp(c, x0, &v, y, 1.0, SEGMENT_STEPS)?;
            return Ok(CSegment { y: y.clone(), times, points, closed_form: false });
        }
        let d = v.len();
        let mut jac = Matrix::zeros(d, d);
        let delta = 1e-6 * (1.0 + v.norm());
        for j in 0..d {
            let mut vp = v.clone();
            vp[j] += delta;
            let mut vm = v.clone();
            vm[j] -= delta;
            jac.set_column(j, &((endpoint(&vp)? - endpoint(&vm)?) / (2.0 * delta)));
        }
        let step = solve(&jac, &miss).map_err(|_| Error::ShootingFailure("singular shooting Jacobian".into()))?;
        v -= step;
    }
    Err(Error::ShootingFailure(format!("no convergence after {SHOOTING_CORRECTIONS} corrections")))
}

/// Second differences of `f` along a sampled segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentConvexity {
    pub is_convex: bool,
    pub min_second_difference: f64,
    pub tolerance: f64,
}

pub fn convexity_along_segment<F>(f: F, segment: &CSegment) -> Result<SegmentConvexity>
where
    F: Fn(&Point) -> Result<f64>,
{
    let values = segment.points.iter().map(&f).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let tolerance = 1e-9 * scale;
    let min = values
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(f64::INFINITY, f64::min);
    Ok(SegmentConvexity { is_convex: min >= -tolerance, min_second_difference: min, tolerance })
}

/// Cross-curvature value with its finite-difference noise estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCurvature {
    pub value: f64,
    pub noise_floor: f64,
    pub analytic: bool,
    /// Set when `|value|` is below ten times the noise floor.
    pub flagged: bool,
}

/// `S_c(x, y)(xi, eta) = a^T M^{-1} b - q` with `M = hess_xy`,
/// `a = grad_y[xi^T c_xx xi]`, `b = grad_x[eta^T c_yy eta]` and
/// `q = d^2_s d^2_t c(x + s xi, y + t eta)`.
pub fn cross_curvature(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Result<CrossCurvature> {
    cross_curvature_impl(c, x, y, xi, eta, true)
}

/// Cross-curvature ignoring analytic third and fourth derivatives.
pub fn cross_curvature_numeric(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Result<CrossCurvature> {
    cross_curvature_impl(c, x, y, xi, eta, false)
}

fn cross_curvature_impl(
    c: &dyn CostFunction,
    x: &Point,
    y: &Point,
    xi: &Point,
    eta: &Point,
    use_analytic: bool,
) -> Result<CrossCurvature> {
    check_dim(c.dim_x(), xi.len())?;
    check_dim(c.dim_y(), eta.len())?;
    if !c.in_domain(x, y) {
        return Err(Error::Domain(format!("{} cross-curvature base point", c.name())));
    }
    let (nxi, neta) = (xi.norm(), eta.norm());
    if nxi == 0.0 || neta == 0.0 {
        return Ok(CrossCurvature { value: 0.0, noise_floor: 0.0, analytic: true, flagged: false });
    }
    let scale = nxi * nxi * neta * neta;
    let (u, w) = (xi / nxi, eta / neta);
    let m = c.hess_xy(x, y)?;
    let analytic = if use_analytic {
        (c.third_xx_y(x, y, &u), c.third_x_yy(x, y, &w), c.fourth_xxyy(x, y, &u, &w))
    } else {
        (None, None, None)
    };
    if let (Some(a), Some(b), Some(q)) = analytic {
        let s = a?.dot(&solve(&m, &b?)?) - q?;
        return Ok(CrossCurvature { value: s * scale, noise_floor: 0.0, analytic: true, flagged: false });
    }
    let base = if c.analytic_hessians() { 2e-3 } else { 1e-2 };
    let at = |h: f64| -> Result<f64> {
        let (a, b, q) = if c.analytic_hessians() {
            hessian_stencils(c, x, y, &u, &w, h)?
        } else {
            value_stencils(c, x, y, &u, &w, h)?
        };
        Ok(a.dot(&solve(&m, &b)?) - q)
    };
    let fine = at(base)?;
    let coarse = at(2.0 * base)?;
    let value = fine * scale;
    let noise_floor = (fine - coarse).abs() * scale;
    Ok(CrossCurvature { value, noise_floor, analytic: false, flagged: value.abs() < 10.0 * noise_floor })
}

fn unit(d: usize, i: usize) -> Point {
    let mut e = Point::zeros(d);
    e[i] = 1.0;
    e
}

fn extrapolate<F: Fn(f64) -> Result<f64>>(h: f64, f: F) -> Result<f64> {
    Ok(crate::fd::richardson(f(h)?, f(h / 2.0)?))
}

fn hessian_stencils(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point, h: f64) -> Result<(Point, Point, f64)> {
    let qx = |a: &Point, b: &Point| -> Result<f64> { Ok(xi.dot(&(c.hess_xx(a, b)? * xi))) };
    let qy = |a: &Point, b: &Point| -> Result<f64> { Ok(eta.dot(&(c.hess_yy(a, b)? * eta))) };
    let mut a = Point::zeros(y.len());
    for mi in 0..y.len() {
        let e = unit(y.len(), mi);
        a[mi] = extrapolate(h, |h| Ok((qx(x, &(y + &e * h))? - qx(x, &(y - &e * h))?) / (2.0 * h)))?;
    }
    let mut b = Point::zeros(x.len());
    for r in 0..x.len() {
        let e = unit(x.len(), r);
        b[r] = extrapolate(h, |h| Ok((qy(&(x + &e * h), y)? - qy(&(x - &e * h), y)?) / (2.0 * h)))?;
    }
    let q0 = qy(x, y)?;
    let q = extrapolate(h, |h| Ok((qy(&(x + xi * h), y)? - 2.0 * q0 + qy(&(x - xi * h), y)?) / (h * h)))?;
    Ok((a, b, q))
}

fn value_stencils(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point, h: f64) -> Result<(Point, Point, f64)> {
    let second_x = |yy: &Point, h: f64| -> Result<f64> {
        Ok((c.value(&(x + xi * h), yy)? - 2.0 * c.value(x, yy)? + c.value(&(x - xi * h), yy)?) / (h * h))
    };
    let second_y = |xx: &Point, h: f64| -> Result<f64> {
        Ok((c.value(xx, &(y + eta * h))? - 2.0 * c.value(xx, y)? + c.value(xx, &(y - eta * h))?) / (h * h))
    };
    let mut a = Point::zeros(y.len());
    for mi in 0..y.len() {
        let e = unit(y.len(), mi);
        a[mi] = extrapolate(h, |h| Ok((second_x(&(y + &e * h), h)? - second_x(&(y - &e * h), h)?) / (2.0 * h)))?;
    }
    let mut b = Point::zeros(x.len());
    for r in 0..x.len() {
        let e = unit(x.len(), r);
        b[r] = extrapolate(h, |h| Ok((second_y(&(x + &e * h), h)? - second_y(&(x - &e * h), h)?) / (2.0 * h)))?;
    }
    let q = extrapolate(h, |h| {
        Ok((second_y(&(x + xi * h), h)? - 2.0 * second_y(x, h)? + second_y(&(x - xi * h), h)?) / (h * h))
    })?;
    Ok((a, b, q))
}

/// Cross-curvature from its path definition, `-d^2_s d^2_t c(x(s), y + t eta)`
/// with `x(s)` the horizontal c-segment through `x` with velocity `xi`.
/// Intended as a coarse cross-check.
pub fn cross_curvature_by_path(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point, h: f64) -> Result<f64> {
    let at = |h: f64| -> Result<f64> {
        let fwd = c_segment_ivp(c, x, xi, y, h, 16)?;
        let bwd = c_segment_ivp(c, x, &-xi, y, h, 16)?;
        let xs = [bwd.last().expect("nonempty").clone(), x.clone(), fwd.last().expect("nonempty").clone()];
        let w = [1.0, -2.0, 1.0];
        let mut acc = 0.0;
        for (i, xx) in xs.iter().enumerate() {
            for (j, t) in [-1.0, 0.0, 1.0].iter().enumerate() {
                acc += w[i] * w[j] * c.value(xx, &(y + eta * (t * h)))?;
            }
        }
        Ok(-acc / h.powi(4))
    };
    extrapolate(h, at)
}

/// The sphere cost pulled back to gnomonic charts centred at `x` and `y`.
#[derive(Debug, Clone)]
pub struct SphereChart {
    pub sphere: SphereCost,
    pub x: Point,
    pub y: Point,
    pub ex: Matrix,
    pub ey: Matrix,
}

impl SphereChart {
    pub fn new(l: f64, x: &Point, y: &Point) -> Result<Self> {
        check_dim(x.len(), y.len())?;
        let sphere = SphereCost { dim: x.len(), l };
        sphere.angle(x, y)?;
        let (x, y) = (x.normalize(), y.normalize());
        Ok(Self { ex: orthogonal_complement(&x), ey: orthogonal_complement(&y), sphere, x, y })
    }

    pub fn chart_x(&self, u: &Point) -> Point {
        &self.x + &self.ex * u
    }

    pub fn chart_y(&self, v: &Point) -> Point {
        &self.y + &self.ey * v
    }
}

impl CostFunction for SphereChart {
    fn name(&self) -> String {
        "sphere_chart".into()
    }
    fn dim_x(&self) -> usize {
        self.ex.ncols()
    }
    fn dim_y(&self) -> usize {
        self.ey.ncols()
    }
    fn value(&self, u: &Point, v: &Point) -> Result<f64> {
        check_dim(self.dim_x(), u.len())?;
        self.sphere.value(&self.chart_x(u), &self.chart_y(v))
    }
    fn grad_x(&self, u: &Point, v: &Point) -> Result<Point> {
        Ok(self.ex.transpose() * self.sphere.grad_x(&self.chart_x(u), &self.chart_y(v))?)
    }
    fn grad_y(&self, u: &Point, v: &Point) -> Result<Point> {
        Ok(self.ey.transpose() * self.sphere.grad_y(&self.chart_x(u), &self.chart_y(v))?)
    }
}

/// Cross-curvature of `L/2 d^2` on the sphere at unit `x`, `y` for tangent
/// vectors `xi` at `x` and `eta` at `y`, evaluated in gnomonic charts.
pub fn sphere_cross_curvature(l: f64, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Result<CrossCurvature> {
    let chart = SphereChart::new(l, x, y)?;
    let u = chart.ex.transpose() * xi;
    let w = chart.ey.transpose() * eta;
    let zero_x = Point::zeros(chart.dim_x());
    let zero_y = Point::zeros(chart.dim_y());
    cross_curvature(&chart, &zero_x, &zero_y, &u, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{bregman_cost, quadratic_cost, reverse_bregman_cost, ExponentialKernelCost, MappedQuadraticCost};
    use crate::costs::{AffineMap, ExpMap};
    use crate::linalg::point;
    use crate::potential::{NegativeEntropy, QuadraticPotential};
    use std::sync::Arc;

    #[test]
    fn cross_difference_of_quadratic_cost_is_bilinear() {
        let c = quadratic_cost(1, 1.0);
        let v = cross_difference(c.as_ref(), &point(&[1.0]), &point(&[1.0]), &point(&[0.0]), &point(&[0.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kim_mccann_metric_of_quadratic_cost() {
        let c = quadratic_cost(1, 2.0);
        let v = kim_mccann_metric(c.as_ref(), &point(&[0.0]), &point(&[0.0]), &point(&[1.0]), &point(&[1.0])).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn c_exponential_examples() {
        let c = quadratic_cost(1, 2.0);
        let y = c_exponential(c.as_ref(), &point(&[1.0]), &point(&[-2.0])).unwrap();
        assert_eq!(y, point(&[0.0]));
        let c = bregman_cost(Arc::new(NegativeEntropy { dim: 1 }));
        let y = c_exponential(c.as_ref(), &point(&[1.0]), &point(&[-1.0])).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn numeric_c_exponential_matches_closed_form() {
        let c = MappedQuadraticCost::new(Arc::new(ExpMap { dim: 2 }), Arc::new(AffineMap::identity(2))).unwrap();
        let x = point(&[0.2, -0.3]);
        let xi = point(&[0.4, 0.1]);
        let closed = c.c_exp_closed(&x, &xi).unwrap().unwrap();
        let newton = c_exponential_from(&c, &x, &xi, &c.dual_guess(&x)).unwrap();
        assert!((closed - newton).amax() < 1e-10);
    }

    #[test]
    fn reverse_bregman_segment_is_affine_in_gradient_coordinates() {
        let c = reverse_bregman_cost(Arc::new(NegativeEntropy { dim: 2 }));
        let (x0, x1, y) = (point(&[0.5, 1.0]), point(&[2.0, 0.2]), point(&[1.0, 1.0]));
        let seg = c_segment(c.as_ref(), &x0, &x1, &y).unwrap();
        assert!(seg.closed_form);
        let mid = &seg.points[SEGMENT_STEPS / 2];
        let expected = (x0.map(|v| v.ln()) * 0.5 + x1.map(|v| v.ln()) * 0.5).map(f64::exp);
        assert!((mid - expected).amax() < 1e-14);
    }

    #[test]
    fn shooting_reproduces_closed_form_segment() {
        let c = ExponentialKernelCost::new(Matrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]), 1.0).unwrap();
        let (x0, x1, y) = (point(&[0.0, 0.3]), point(&[0.8, -0.4]), point(&[0.1, 0.2]));
        let closed = c_segment(&c, &x0, &x1, &y).unwrap();
        let ivp_guess = &closed.points[1] - &closed.points[0];
        let _ = ivp_guess;
        let wrapped = NoClosedForm(&c);
        let shot = c_segment(&wrapped, &x0, &x1, &y).unwrap();
        assert!(!shot.closed_form);
        for (a, b) in closed.points.iter().zip(&shot.points) {
            assert!((a - b).amax() < 1e-6);
        }
    }

    /// Hides closed forms so the numeric paths are exercised.
    #[derive(Debug)]
    struct NoClosedForm<'a>(&'a dyn CostFunction);

    impl CostFunction for NoClosedForm<'_> {
        fn name(&self) -> String {
            self.0.name()
        }
        fn dim_x(&self) -> usize {
            self.0.dim_x()
        }
        fn dim_y(&self) -> usize {
            self.0.dim_y()
        }
        fn value(&self, x: &Point, y: &Point) -> Result<f64> {
            self.0.value(x, y)
        }
        fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
            self.0.grad_x(x, y)
        }
        fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
            self.0.grad_y(x, y)
        }
        fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
            self.0.hess_xx(x, y)
        }
        fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
            self.0.hess_xy(x, y)
        }
        fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
            self.0.hess_yy(x, y)
        }
        fn analytic_hessians(&self) -> bool {
            self.0.analytic_hessians()
        }
    }

    #[test]
    fn gradient_in_y_is_affine_along_segments() {
        let c = MappedQuadraticCost::new(Arc::new(ExpMap { dim: 2 }), Arc::new(AffineMap::identity(2))).unwrap();
        let wrapped = NoClosedForm(&c);
        let (x0, x1, y) = (point(&[0.1, -0.2]), point(&[0.5, 0.3]), point(&[1.0, 0.5]));
        let seg = c_segment(&wrapped, &x0, &x1, &y).unwrap();
        let g0 = c.grad_y(&x0, &y).unwrap();
        let g1 = c.grad_y(&x1, &y).unwrap();
        for (t, p) in seg.times.iter().zip(&seg.points) {
            let chord = &g0 * (1.0 - t) + &g1 * *t;
            assert!((c.grad_y(p, &y).unwrap() - chord).amax() < 1e-5);
        }
    }

    #[test]
    fn flat_costs_have_zero_cross_curvature() {
        let (x, y) = (point(&[0.4, 0.7]), point(&[0.9, 0.3]));
        let (xi, eta) = (point(&[1.0, -0.5]), point(&[0.3, 0.8]));
        let costs = [
            quadratic_cost(2, 1.0),
            bregman_cost(Arc::new(NegativeEntropy { dim: 2 })),
            bregman_cost(Arc::new(QuadraticPotential::new(2, 3.0))),
        ];
        for c in costs {
            let s = cross_curvature(c.as_ref(), &x, &y, &xi, &eta).unwrap();
            assert!(s.value.abs() < 1e-12);
            let n = cross_curvature_numeric(c.as_ref(), &x, &y, &xi, &eta).unwrap();
            assert!(n.value.abs() < 1e-6, "{} {}", c.name(), n.value);
        }
    }

    #[test]
    fn numeric_cross_curvature_matches_analytic_for_exponential_kernel() {
        let c = ExponentialKernelCost::new(Matrix::from_row_slice(2, 2, &[1.0, 0.4, -0.2, 1.0]), 0.8).unwrap();
        let (x, y) = (point(&[0.1, 0.2]), point(&[0.3, -0.1]));
        let (xi, eta) = (point(&[1.0, 0.3]), point(&[-0.4, 1.0]));
        let a = cross_curvature(&c, &x, &y, &xi, &eta).unwrap();
        let n = cross_curvature_numeric(&c, &x, &y, &xi, &eta).unwrap();
        assert!(a.analytic && !n.analytic);
        assert!((a.value - n.value).abs() < 1e-6 * (1.0 + a.value.abs()));
    }

    #[test]
    fn path_definition_agrees_with_coordinate_formula() {
        let c = MappedQuadraticCost::new(Arc::new(ExpMap { dim: 2 }), Arc::new(AffineMap::identity(2))).unwrap();
        let (x, y) = (point(&[0.1, -0.2]), point(&[0.4, 0.5]));
        let (xi, eta) = (point(&[1.0, 0.5]), point(&[0.2, -1.0]));
        let s = cross_curvature(&c, &x, &y, &xi, &eta).unwrap().value;
        let p = cross_curvature_by_path(&c, &x, &y, &xi, &eta, 0.05).unwrap();
        assert!((s - p).abs() < 1e-2 * (1.0 + s.abs()), "{s} vs {p}");
    }

    #[test]
    fn sphere_cross_curvature_is_nonnegative() {
        let x = point(&[1.0, 0.0, 0.0]);
        let y = point(&[0.6, 0.8, 0.0]);
        let xi = point(&[0.0, 0.3, 1.0]);
        let eta = point(&[0.0, 0.0, 1.0]);
        let s = sphere_cross_curvature(1.0, &x, &y, &xi, &eta).unwrap();
        assert!(s.value >= -1e-6, "{s:?}");
    }
}
