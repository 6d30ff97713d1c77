use std::fmt::Debug;
use std::sync::Arc;

use super::{ensure, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::fd;
use crate::linalg::{solve, Matrix, Point};

/// `L/2 |x - y|^2`.
#[derive(Debug, Clone)]
pub struct QuadraticCost {
    pub dim: usize,
    pub l: f64,
}

impl CostFunction for QuadraticCost {
    fn name(&self) -> String {
        "quadratic".into()
    }
    fn dim_x(&self) -> usize {
        self.dim
    }
    fn dim_y(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        ensure(self, x, y)?;
        Ok(0.5 * self.l * (x - y).norm_squared())
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok((x - y) * self.l)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok((y - x) * self.l)
    }
    fn hess_xx(&self, _x: &Point, _y: &Point) -> Result<Matrix> {
        Ok(Matrix::identity(self.dim, self.dim) * self.l)
    }
    fn hess_xy(&self, _x: &Point, _y: &Point) -> Result<Matrix> {
        Ok(Matrix::identity(self.dim, self.dim) * -self.l)
    }
    fn hess_yy(&self, _x: &Point, _y: &Point) -> Result<Matrix> {
        Ok(Matrix::identity(self.dim, self.dim) * self.l)
    }
    fn analytic_hessians(&self) -> bool {
        true
    }
    fn third_xx_y(&self, _x: &Point, _y: &Point, _xi: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(self.dim)))
    }
    fn third_x_yy(&self, _x: &Point, _y: &Point, _eta: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(self.dim)))
    }
    fn fourth_xxyy(&self, _x: &Point, _y: &Point, _xi: &Point, _eta: &Point) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some(check_dim(self.dim, xi.len()).map(|_| x + xi / self.l))
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(Ok(y.clone()))
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        Some(Ok(x0 * (1.0 - t) + x1 * t))
    }
}

/// A smooth invertible map `R^d -> R^d` used to build mapped quadratic costs.
pub trait Diffeo: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn apply(&self, x: &Point) -> Result<Point>;
    fn jacobian(&self, x: &Point) -> Result<Matrix>;

    /// `sum_k w_k hess(A_k)(x)`.
    fn second_contract(&self, x: &Point, w: &Point) -> Result<Matrix> {
        fd::fd_jacobian(|z| Ok(self.jacobian(z)?.transpose() * w), x, None)
    }

    fn inverse(&self, _z: &Point) -> Option<Result<Point>> {
        None
    }
}

/// `x -> M x + b`.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub m: Matrix,
    pub b: Point,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        Self { m: Matrix::identity(dim, dim), b: Point::zeros(dim) }
    }
}

impl Diffeo for AffineMap {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn name(&self) -> String {
        "affine".into()
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim(), x.len())?;
        Ok(&self.m * x + &self.b)
    }
    fn jacobian(&self, _x: &Point) -> Result<Matrix> {
        Ok(self.m.clone())
    }
    fn second_contract(&self, x: &Point, _w: &Point) -> Result<Matrix> {
        Ok(Matrix::zeros(x.len(), x.len()))
    }
    fn inverse(&self, z: &Point) -> Option<Result<Point>> {
        Some(solve(&self.m, &(z - &self.b)))
    }
}

/// Componentwise `x -> exp(x)`.
#[derive(Debug, Clone)]
pub struct ExpMap {
    pub dim: usize,
}

impl Diffeo for ExpMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "exp".into()
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim, x.len())?;
        Ok(x.map(f64::exp))
    }
    fn jacobian(&self, x: &Point) -> Result<Matrix> {
        Ok(Matrix::from_diagonal(&x.map(f64::exp)))
    }
    fn second_contract(&self, x: &Point, w: &Point) -> Result<Matrix> {
        Ok(Matrix::from_diagonal(&x.zip_map(w, |xi, wi| wi * xi.exp())))
    }
    fn inverse(&self, z: &Point) -> Option<Result<Point>> {
        Some(if z.iter().all(|v| *v > 0.0) {
            Ok(z.map(f64::ln))
        } else {
            Err(Error::Domain("exp map inverse needs positive input".into()))
        })
    }
}

/// Componentwise `x -> sinh(x)`.
#[derive(Debug, Clone)]
pub struct SinhMap {
    pub dim: usize,
}

impl Diffeo for SinhMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "sinh".into()
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        check_dim(self.dim, x.len())?;
        Ok(x.map(f64::sinh))
    }
    fn jacobian(&self, x: &Point) -> Result<Matrix> {
        Ok(Matrix::from_diagonal(&x.map(f64::cosh)))
    }
    fn second_contract(&self, x: &Point, w: &Point) -> Result<Matrix> {
        Ok(Matrix::from_diagonal(&x.zip_map(w, |xi, wi| wi * xi.sinh())))
    }
    fn inverse(&self, z: &Point) -> Option<Result<Point>> {
        Some(Ok(z.map(f64::asinh)))
    }
}

/// `|A(x) - B(y)|^2` for diffeomorphisms `A`, `B`.
#[derive(Debug, Clone)]
pub struct MappedQuadraticCost {
    pub a: Arc<dyn Diffeo>,
    pub b: Arc<dyn Diffeo>,
}

impl MappedQuadraticCost {
    pub fn new(a: Arc<dyn Diffeo>, b: Arc<dyn Diffeo>) -> Result<Self> {
        check_dim(a.dim(), b.dim())?;
        Ok(Self { a, b })
    }

    fn residual(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(self.a.apply(x)? - self.b.apply(y)?)
    }
}

impl CostFunction for MappedQuadraticCost {
    fn name(&self) -> String {
        format!("mapped_quadratic({},{})", self.a.name(), self.b.name())
    }
    fn dim_x(&self) -> usize {
        self.a.dim()
    }
    fn dim_y(&self) -> usize {
        self.b.dim()
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.residual(x, y)?.norm_squared())
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        let r = self.residual(x, y)?;
        Ok(self.a.jacobian(x)?.transpose() * r * 2.0)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        let r = self.residual(x, y)?;
        Ok(self.b.jacobian(y)?.transpose() * r * -2.0)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let r = self.residual(x, y)?;
        let ja = self.a.jacobian(x)?;
        Ok((ja.transpose() * &ja + self.a.second_contract(x, &r)?) * 2.0)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(self.a.jacobian(x)?.transpose() * self.b.jacobian(y)? * -2.0)
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let r = self.residual(x, y)?;
        let jb = self.b.jacobian(y)?;
        Ok((jb.transpose() * &jb - self.b.second_contract(y, &r)?) * 2.0)
    }
    fn analytic_hessians(&self) -> bool {
        true
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        let target = (|| -> Result<Point> {
            let ja = self.a.jacobian(x)?;
            let shift = solve(&ja.transpose(), xi)?;
            Ok(self.a.apply(x)? + shift * 0.5)
        })();
        match target {
            Ok(t) => self.b.inverse(&t),
            Err(e) => Some(Err(e)),
        }
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        match self.b.apply(y) {
            Ok(z) => self.a.inverse(&z),
            Err(e) => Some(Err(e)),
        }
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        let z = (|| -> Result<Point> { Ok(self.a.apply(x0)? * (1.0 - t) + self.a.apply(x1)? * t) })();
        match z {
            Ok(z) => self.a.inverse(&z),
            Err(e) => Some(Err(e)),
        }
    }
}
