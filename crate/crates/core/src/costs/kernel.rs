use super::{ensure, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{solve, Matrix, Point};

/// `sum_ij K_ij exp((x_i - y_j) / eps)` with invertible `K`.
#[derive(Debug, Clone)]
pub struct ExponentialKernelCost {
    pub k: Matrix,
    pub eps: f64,
}

impl ExponentialKernelCost {
    pub fn new(k: Matrix, eps: f64) -> Result<Self> {
        check_dim(k.nrows(), k.ncols())?;
        if eps == 0.0 || !eps.is_finite() {
            return Err(Error::InvalidParameter("eps must be finite and nonzero".into()));
        }
        if k.clone().lu().determinant().abs() < 1e-12 {
            return Err(Error::InvalidParameter("kernel matrix must be invertible".into()));
        }
        Ok(Self { k, eps })
    }

    fn weights(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        let d = x.len();
        Ok(Matrix::from_fn(d, d, |i, j| self.k[(i, j)] * ((x[i] - y[j]) / self.eps).exp()))
    }
}

impl CostFunction for ExponentialKernelCost {
    fn name(&self) -> String {
        format!("exponential_kernel(eps={})", self.eps)
    }
    fn dim_x(&self) -> usize {
        self.k.nrows()
    }
    fn dim_y(&self) -> usize {
        self.k.ncols()
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.weights(x, y)?.sum())
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        let e = self.weights(x, y)?;
        Ok(Point::from_iterator(x.len(), e.row_iter().map(|r| r.sum() / self.eps)))
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        let e = self.weights(x, y)?;
        Ok(Point::from_iterator(y.len(), e.column_iter().map(|c| -c.sum() / self.eps)))
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let e = self.weights(x, y)?;
        let s = self.eps * self.eps;
        Ok(Matrix::from_diagonal(&Point::from_iterator(x.len(), e.row_iter().map(|r| r.sum() / s))))
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(self.weights(x, y)? / -(self.eps * self.eps))
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let e = self.weights(x, y)?;
        let s = self.eps * self.eps;
        Ok(Matrix::from_diagonal(&Point::from_iterator(y.len(), e.column_iter().map(|c| c.sum() / s))))
    }
    fn analytic_hessians(&self) -> bool {
        true
    }
    fn third_xx_y(&self, x: &Point, y: &Point, xi: &Point) -> Option<Result<Point>> {
        Some(self.weights(x, y).map(|e| {
            let xi2 = xi.map(|v| v * v);
            e.transpose() * xi2 / -self.eps.powi(3)
        }))
    }
    fn third_x_yy(&self, x: &Point, y: &Point, eta: &Point) -> Option<Result<Point>> {
        Some(self.weights(x, y).map(|e| {
            let eta2 = eta.map(|v| v * v);
            e * eta2 / self.eps.powi(3)
        }))
    }
    fn fourth_xxyy(&self, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Option<Result<f64>> {
        Some(self.weights(x, y).map(|e| {
            let xi2 = xi.map(|v| v * v);
            let eta2 = eta.map(|v| v * v);
            xi2.dot(&(e * eta2)) / self.eps.powi(4)
        }))
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some((|| {
            check_dim(x.len(), xi.len())?;
            let rhs = Point::from_iterator(x.len(), (0..x.len()).map(|i| -self.eps * xi[i] * (-x[i] / self.eps).exp()));
            let t = solve(&self.k, &rhs)?;
            if t.iter().all(|v| *v > 0.0) {
                Ok(t.map(|v| -self.eps * v.ln()))
            } else {
                Err(Error::Domain("no y solves the c-exponential equation".into()))
            }
        })())
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        let eps = self.eps;
        Some(Ok(x0.zip_map(x1, |a, b| eps * ((1.0 - t) * (a / eps).exp() + t * (b / eps).exp()).ln())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::testing::{assert_derivatives, assert_higher_derivatives};
    use crate::linalg::point;

    fn cost() -> ExponentialKernelCost {
        ExponentialKernelCost::new(Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 0.8]), 0.7).unwrap()
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = cost();
        let (x, y) = (point(&[0.2, -0.3]), point(&[0.1, 0.4]));
        assert_derivatives(&c, &x, &y, 1e-6);
        assert_higher_derivatives(&c, &x, &y, &point(&[0.5, -1.0]), &point(&[0.7, 0.2]));
    }

    #[test]
    fn c_exponential_solves_first_order_condition() {
        let c = cost();
        let x = point(&[0.2, -0.3]);
        let xi = point(&[-0.8, -0.5]);
        let y = c.c_exp_closed(&x, &xi).unwrap().unwrap();
        assert!((c.grad_x(&x, &y).unwrap() + xi).amax() < 1e-12);
    }

    #[test]
    fn singular_kernel_is_rejected() {
        let k = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(ExponentialKernelCost::new(k, 1.0).is_err());
    }
}
