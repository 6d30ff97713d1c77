use super::{ensure, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Point;

/// `L/2 d(x, y)^2` with `d` the great-circle distance on the unit sphere in
/// `R^dim`. Inputs are normalized first, so ambient gradients at unit
/// points are tangent.
#[derive(Debug, Clone)]
pub struct SphereCost {
    pub dim: usize,
    pub l: f64,
}

/// `theta / sin(theta)`, stable near zero.
fn theta_over_sin(theta: f64) -> f64 {
    if theta < 1e-4 {
        1.0 + theta * theta / 6.0
    } else {
        theta / theta.sin()
    }
}

impl SphereCost {
    pub fn angle(&self, x: &Point, y: &Point) -> Result<f64> {
        ensure(self, x, y)?;
        let s = (x.normalize().dot(&y.normalize())).clamp(-1.0, 1.0);
        if s <= -1.0 + 1e-12 {
            return Err(Error::Antipodal);
        }
        Ok(s.acos())
    }

    /// Riemannian exponential map `exp_x(v)` for tangent `v`.
    pub fn exp_map(x: &Point, v: &Point) -> Point {
        let n = v.norm();
        if n == 0.0 {
            return x.clone();
        }
        x * n.cos() + v * (n.sin() / n)
    }

    /// Riemannian logarithm `log_x(y)`.
    pub fn log_map(&self, x: &Point, y: &Point) -> Result<Point> {
        let theta = self.angle(x, y)?;
        let (xn, yn) = (x.normalize(), y.normalize());
        Ok((&yn - &xn * xn.dot(&yn)) * theta_over_sin(theta))
    }

    fn tangent_gradient(&self, x: &Point, y: &Point) -> Result<Point> {
        let g = self.log_map(x, y)? * -self.l;
        Ok(g / x.norm())
    }
}

impl CostFunction for SphereCost {
    fn name(&self) -> String {
        "sphere".into()
    }
    fn dim_x(&self) -> usize {
        self.dim
    }
    fn dim_y(&self) -> usize {
        self.dim
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        x.len() == self.dim && y.len() == self.dim && x.norm() > 0.0 && y.norm() > 0.0
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        let t = self.angle(x, y)?;
        Ok(0.5 * self.l * t * t)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        self.tangent_gradient(x, y)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        self.tangent_gradient(y, x)
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some((|| {
            check_dim(self.dim, xi.len())?;
            let xn = x.normalize();
            let v = (xi - &xn * xn.dot(xi)) / self.l;
            if v.norm() >= std::f64::consts::PI {
                return Err(Error::Domain("tangent step reaches the cut locus".into()));
            }
            Ok(Self::exp_map(&xn, &v))
        })())
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(Ok(y.normalize()))
    }
    fn segment_closed(&self, _x0: &Point, _x1: &Point, _y: &Point, _t: f64) -> Option<Result<Point>> {
        Some(Err(Error::ShootingFailure(
            "sphere c-segments are computed in a tangent chart".into(),
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    #[test]
    fn quarter_circle_value() {
        let c = SphereCost { dim: 3, l: 1.0 };
        let v = c.value(&point(&[1.0, 0.0, 0.0]), &point(&[0.0, 1.0, 0.0])).unwrap();
        assert!((v - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-14);
    }

    #[test]
    fn antipodal_points_are_rejected() {
        let c = SphereCost { dim: 2, l: 1.0 };
        assert_eq!(c.value(&point(&[1.0, 0.0]), &point(&[-1.0, 0.0])), Err(Error::Antipodal));
    }

    #[test]
    fn gradient_is_tangent_and_matches_finite_differences() {
        let c = SphereCost { dim: 3, l: 2.0 };
        let x = point(&[1.0, 2.0, 2.0]).normalize();
        let y = point(&[0.0, 1.0, -1.0]).normalize();
        let g = c.grad_x(&x, &y).unwrap();
        assert!(g.dot(&x).abs() < 1e-12);
        let gfd = crate::fd::fd_gradient(|z| c.value(z, &y), &x, None).unwrap();
        assert!((g - gfd).amax() < 1e-7);
    }

    #[test]
    fn c_exponential_inverts_gradient() {
        let c = SphereCost { dim: 3, l: 1.5 };
        let x = point(&[0.0, 0.6, 0.8]);
        let xi = point(&[0.7, 0.3, -0.225]);
        let y = c.c_exp_closed(&x, &xi).unwrap().unwrap();
        assert!((y.norm() - 1.0).abs() < 1e-14);
        let xn = x.normalize();
        let tangent = &xi - &xn * xn.dot(&xi);
        assert!((c.grad_x(&x, &y).unwrap() + tangent).amax() < 1e-12);
    }
}
