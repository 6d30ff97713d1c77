use super::{ensure, CostRef, CostFunction};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Point};

/// `c1(x1, y1) + c2(x2, y2)` on the product spaces.
#[derive(Debug, Clone)]
pub struct TensorProductCost {
    pub first: CostRef,
    pub second: CostRef,
}

impl TensorProductCost {
    pub fn new(first: CostRef, second: CostRef) -> Result<Self> {
        for c in [&first, &second] {
            if c.dim_x() != c.dim_y() {
                return Err(Error::InvalidParameter(format!(
                    "factor {} has unequal dimensions {} and {}",
                    c.name(),
                    c.dim_x(),
                    c.dim_y()
                )));
            }
        }
        Ok(Self { first, second })
    }

    fn split_x(&self, x: &Point) -> (Point, Point) {
        let n = self.first.dim_x();
        (x.rows(0, n).into_owned(), x.rows(n, x.len() - n).into_owned())
    }

    fn split_y(&self, y: &Point) -> (Point, Point) {
        let n = self.first.dim_y();
        (y.rows(0, n).into_owned(), y.rows(n, y.len() - n).into_owned())
    }

    fn parts(&self, x: &Point, y: &Point) -> Result<(Point, Point, Point, Point)> {
        ensure(self, x, y)?;
        let (x1, x2) = self.split_x(x);
        let (y1, y2) = self.split_y(y);
        Ok((x1, x2, y1, y2))
    }
}

fn concat(a: Point, b: Point) -> Point {
    Point::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).cloned())
}

fn block(a: Matrix, b: Matrix) -> Matrix {
    let mut m = Matrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(&a);
    m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols())).copy_from(&b);
    m
}

fn both<T>(a: Option<Result<T>>, b: Option<Result<T>>, join: impl FnOnce(T, T) -> T) -> Option<Result<T>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.and_then(|a| b.map(|b| join(a, b)))),
        _ => None,
    }
}

impl CostFunction for TensorProductCost {
    fn name(&self) -> String {
        format!("tensor({}, {})", self.first.name(), self.second.name())
    }
    fn dim_x(&self) -> usize {
        self.first.dim_x() + self.second.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.first.dim_y() + self.second.dim_y()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        if x.len() != self.dim_x() || y.len() != self.dim_y() {
            return false;
        }
        let (x1, x2) = self.split_x(x);
        let (y1, y2) = self.split_y(y);
        self.first.in_domain(&x1, &y1) && self.second.in_domain(&x2, &y2)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(self.first.value(&x1, &y1)? + self.second.value(&x2, &y2)?)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(concat(self.first.grad_x(&x1, &y1)?, self.second.grad_x(&x2, &y2)?))
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(concat(self.first.grad_y(&x1, &y1)?, self.second.grad_y(&x2, &y2)?))
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(block(self.first.hess_xx(&x1, &y1)?, self.second.hess_xx(&x2, &y2)?))
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(block(self.first.hess_xy(&x1, &y1)?, self.second.hess_xy(&x2, &y2)?))
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (x1, x2, y1, y2) = self.parts(x, y)?;
        Ok(block(self.first.hess_yy(&x1, &y1)?, self.second.hess_yy(&x2, &y2)?))
    }
    fn analytic_hessians(&self) -> bool {
        self.first.analytic_hessians() && self.second.analytic_hessians()
    }
    fn third_xx_y(&self, x: &Point, y: &Point, xi: &Point) -> Option<Result<Point>> {
        let (x1, x2, y1, y2) = self.parts(x, y).ok()?;
        let (xi1, xi2) = self.split_x(xi);
        both(self.first.third_xx_y(&x1, &y1, &xi1), self.second.third_xx_y(&x2, &y2, &xi2), concat)
    }
    fn third_x_yy(&self, x: &Point, y: &Point, eta: &Point) -> Option<Result<Point>> {
        let (x1, x2, y1, y2) = self.parts(x, y).ok()?;
        let (e1, e2) = self.split_y(eta);
        both(self.first.third_x_yy(&x1, &y1, &e1), self.second.third_x_yy(&x2, &y2, &e2), concat)
    }
    fn fourth_xxyy(&self, x: &Point, y: &Point, xi: &Point, eta: &Point) -> Option<Result<f64>> {
        let (x1, x2, y1, y2) = self.parts(x, y).ok()?;
        let (xi1, xi2) = self.split_x(xi);
        let (e1, e2) = self.split_y(eta);
        both(
            self.first.fourth_xxyy(&x1, &y1, &xi1, &e1),
            self.second.fourth_xxyy(&x2, &y2, &xi2, &e2),
            |a, b| a + b,
        )
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        let (x1, x2) = self.split_x(x);
        let (xi1, xi2) = self.split_x(xi);
        Some((|| {
            let y1 = crate::geometry::c_exponential(self.first.as_ref(), &x1, &xi1)?;
            let y2 = crate::geometry::c_exponential(self.second.as_ref(), &x2, &xi2)?;
            Ok(concat(y1, y2))
        })())
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        let (y1, y2) = self.split_y(y);
        Some((|| {
            let x1 = crate::geometry::x_argmin(self.first.as_ref(), &y1, None)?;
            let x2 = crate::geometry::x_argmin(self.second.as_ref(), &y2, None)?;
            Ok(concat(x1, x2))
        })())
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, y: &Point, t: f64) -> Option<Result<Point>> {
        let (a0, b0) = self.split_x(x0);
        let (a1, b1) = self.split_x(x1);
        let (ya, yb) = self.split_y(y);
        both(
            self.first.segment_closed(&a0, &a1, &ya, t),
            self.second.segment_closed(&b0, &b1, &yb, t),
            concat,
        )
    }
    fn dual_guess(&self, x: &Point) -> Point {
        let (x1, x2) = self.split_x(x);
        concat(self.first.dual_guess(&x1), self.second.dual_guess(&x2))
    }
}
