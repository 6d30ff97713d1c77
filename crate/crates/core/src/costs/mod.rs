//! Cost functions `c : X x Y -> R` and the builtin families.
//!
//! Every cost provides values and first/second derivatives; missing analytic
//! derivatives fall back to finite differences. Costs may also expose closed
//! forms for the c-exponential, the x-minimizer `argmin_x c(x, y)` and
//! horizontal c-segments, plus analytic third and fourth derivatives used by
//! the cross-curvature evaluator.

mod bregman;
mod kernel;
mod product;
mod quadratic;
mod sphere;

use std::fmt::Debug;
use std::sync::Arc;

pub use bregman::{BregmanCost, FenchelYoungCost, LogDivergenceCost, ReverseBregmanCost};
pub use kernel::ExponentialKernelCost;
pub use product::TensorProductCost;
pub use quadratic::{AffineMap, Diffeo, ExpMap, MappedQuadraticCost, QuadraticCost, SinhMap};
pub use sphere::SphereCost;

use crate::error::{check_dim, Error, Result};
use crate::fd;
use crate::linalg::{Matrix, Point};
use crate::potential::PotentialRef;

pub trait CostFunction: Send + Sync + Debug {
    fn name(&self) -> String;
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;

    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        x.len() == self.dim_x() && y.len() == self.dim_y()
    }

    fn value(&self, x: &Point, y: &Point) -> Result<f64>;

    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        fd::fd_gradient(|z| self.value(z, y), x, None)
    }

    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        fd::fd_gradient(|z| self.value(x, z), y, None)
    }

    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(crate::linalg::symmetrize(&fd::fd_jacobian(|z| self.grad_x(z, y), x, None)?))
    }

    /// `M[i][j] = d^2 c / dx_i dy_j`.
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        fd::fd_jacobian(|z| self.grad_x(x, z), y, None)
    }

    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(crate::linalg::symmetrize(&fd::fd_jacobian(|z| self.grad_y(x, z), y, None)?))
    }

    /// Whether all three Hessian blocks are analytic.
    fn analytic_hessians(&self) -> bool {
        false
    }

    /// `grad_y [xi^T hess_xx(x, y) xi]`, indexed by `y`.
    fn third_xx_y(&self, _x: &Point, _y: &Point, _xi: &Point) -> Option<Result<Point>> {
        None
    }

    /// `grad_x [eta^T hess_yy(x, y) eta]`, indexed by `x`.
    fn third_x_yy(&self, _x: &Point, _y: &Point, _eta: &Point) -> Option<Result<Point>> {
        None
    }

    /// `d^2/ds^2 d^2/dt^2 c(x + s xi, y + t eta)` at `s = t = 0`.
    fn fourth_xxyy(&self, _x: &Point, _y: &Point, _xi: &Point, _eta: &Point) -> Option<Result<f64>> {
        None
    }

    /// Closed-form solution `y` of `-grad_x c(x, y) = xi`.
    fn c_exp_closed(&self, _x: &Point, _xi: &Point) -> Option<Result<Point>> {
        None
    }

    /// Closed-form `argmin_x c(x, y)`.
    fn x_argmin_closed(&self, _y: &Point) -> Option<Result<Point>> {
        None
    }

    /// Closed-form point at time `t` of the horizontal c-segment from `x0` to
    /// `x1` with `y` fixed.
    fn segment_closed(&self, _x0: &Point, _x1: &Point, _y: &Point, _t: f64) -> Option<Result<Point>> {
        None
    }

    /// Starting guess for numeric solves over `y`.
    fn dual_guess(&self, x: &Point) -> Point {
        if self.dim_x() == self.dim_y() {
            x.clone()
        } else {
            Point::zeros(self.dim_y())
        }
    }
}

pub type CostRef = Arc<dyn CostFunction>;

/// Dimension and domain check shared by the builtin costs.
pub(crate) fn ensure(c: &dyn CostFunction, x: &Point, y: &Point) -> Result<()> {
    check_dim(c.dim_x(), x.len())?;
    check_dim(c.dim_y(), y.len())?;
    if c.in_domain(x, y) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{} at x={:?}, y={:?}", c.name(), x.as_slice(), y.as_slice())))
    }
}

pub fn quadratic_cost(dim: usize, l: f64) -> CostRef {
    Arc::new(QuadraticCost { dim, l })
}

pub fn bregman_cost(u: PotentialRef) -> CostRef {
    Arc::new(BregmanCost { u })
}

pub fn reverse_bregman_cost(u: PotentialRef) -> CostRef {
    Arc::new(ReverseBregmanCost { u })
}

pub fn fenchel_young_cost(u: PotentialRef) -> CostRef {
    Arc::new(FenchelYoungCost { u })
}

pub fn log_divergence_cost(u: PotentialRef, alpha: f64) -> Result<CostRef> {
    Ok(Arc::new(LogDivergenceCost::new(u, alpha)?))
}

pub fn exponential_kernel_cost(k: Matrix, eps: f64) -> Result<CostRef> {
    Ok(Arc::new(ExponentialKernelCost::new(k, eps)?))
}

pub fn sphere_cost(dim: usize, l: f64) -> CostRef {
    Arc::new(SphereCost { dim, l })
}

pub fn mapped_quadratic_cost(a: Arc<dyn Diffeo>, b: Arc<dyn Diffeo>) -> Result<CostRef> {
    Ok(Arc::new(MappedQuadraticCost::new(a, b)?))
}

pub fn tensor_product_cost(c1: CostRef, c2: CostRef) -> Result<CostRef> {
    Ok(Arc::new(TensorProductCost::new(c1, c2)?))
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// Compares analytic first and second derivatives with finite
    /// differences of values and analytic gradients.
    pub fn assert_derivatives(c: &dyn CostFunction, x: &Point, y: &Point, tol: f64) {
        let gx = c.grad_x(x, y).unwrap();
        let gy = c.grad_y(x, y).unwrap();
        let gx_fd = fd::fd_gradient(|z| c.value(z, y), x, None).unwrap();
        let gy_fd = fd::fd_gradient(|z| c.value(x, z), y, None).unwrap();
        let rel = |a: &Point, b: &Point| (a - b).amax() / a.amax().max(1.0);
        assert!(rel(&gx, &gx_fd) < tol, "{} grad_x {} vs {}", c.name(), gx, gx_fd);
        assert!(rel(&gy, &gy_fd) < tol, "{} grad_y", c.name());
        let hxx = fd::fd_jacobian(|z| c.grad_x(z, y), x, None).unwrap();
        let hxy = fd::fd_jacobian(|z| c.grad_x(x, z), y, None).unwrap();
        let hyy = fd::fd_jacobian(|z| c.grad_y(x, z), y, None).unwrap();
        assert!(fd::relative_error(&c.hess_xx(x, y).unwrap(), &hxx) < tol, "{} hess_xx", c.name());
        assert!(fd::relative_error(&c.hess_xy(x, y).unwrap(), &hxy) < tol, "{} hess_xy", c.name());
        assert!(fd::relative_error(&c.hess_yy(x, y).unwrap(), &hyy) < tol, "{} hess_yy", c.name());
        let hxy_values = fd::fd_mixed_hessian(|a, b| c.value(a, b), x, y, None).unwrap();
        assert!(fd::relative_error(&c.hess_xy(x, y).unwrap(), &hxy_values) < 1e-4, "{} mixed", c.name());
    }

    /// Compares optional analytic third and fourth derivatives with
    /// finite differences of the analytic Hessians.
    pub fn assert_higher_derivatives(c: &dyn CostFunction, x: &Point, y: &Point, xi: &Point, eta: &Point) {
        let h = 1e-4;
        let qx = |xx: &Point, yy: &Point| xi.dot(&(c.hess_xx(xx, yy).unwrap() * xi));
        let qy = |xx: &Point, yy: &Point| eta.dot(&(c.hess_yy(xx, yy).unwrap() * eta));
        if let Some(a) = c.third_xx_y(x, y, xi) {
            let a = a.unwrap();
            for m in 0..y.len() {
                let mut e = Point::zeros(y.len());
                e[m] = h;
                let fd = (qx(x, &(y + &e)) - qx(x, &(y - &e))) / (2.0 * h);
                assert!((a[m] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "{} third_xx_y", c.name());
            }
        }
        if let Some(b) = c.third_x_yy(x, y, eta) {
            let b = b.unwrap();
            for r in 0..x.len() {
                let mut e = Point::zeros(x.len());
                e[r] = h;
                let fd = (qy(&(x + &e), y) - qy(&(x - &e), y)) / (2.0 * h);
                assert!((b[r] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "{} third_x_yy", c.name());
            }
        }
        if let Some(q) = c.fourth_xxyy(x, y, xi, eta) {
            let q = q.unwrap();
            let k = 1e-3;
            let fd = (qy(&(x + xi * k), y) - 2.0 * qy(x, y) + qy(&(x - xi * k), y)) / (k * k);
            assert!((q - fd).abs() < 1e-4 * (1.0 + fd.abs()), "{} fourth {} vs {}", c.name(), q, fd);
        }
    }
}
