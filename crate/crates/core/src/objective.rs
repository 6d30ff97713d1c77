//! Smooth objectives `f : R^d -> R` with analytic or finite-difference
//! derivatives.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::fd;
use crate::linalg::{symmetrize, Matrix, Point};

pub trait Objective: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn value(&self, x: &Point) -> Result<f64>;

    fn gradient(&self, x: &Point) -> Result<Point> {
        fd::fd_gradient(|z| self.value(z), x, None)
    }

    fn hessian(&self, x: &Point) -> Result<Matrix> {
        Ok(symmetrize(&fd::fd_jacobian(|z| self.gradient(z), x, None)?))
    }

    fn in_domain(&self, x: &Point) -> bool {
        x.len() == self.dim() && x.iter().all(|v| v.is_finite())
    }
}

pub type ObjectiveRef = Arc<dyn Objective>;

pub(crate) fn ensure(obj: &dyn Objective, x: &Point) -> Result<()> {
    check_dim(obj.dim(), x.len())?;
    if obj.in_domain(x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{} at {:?}", obj.name(), x.as_slice())))
    }
}

/// `1/2 (x - a)^T A (x - a) + offset`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub a: Matrix,
    pub anchor: Point,
    pub offset: f64,
}

impl QuadraticObjective {
    pub fn new(a: Matrix, anchor: Point, offset: f64) -> Result<Self> {
        check_dim(a.nrows(), anchor.len())?;
        check_dim(a.ncols(), anchor.len())?;
        Ok(Self { a: symmetrize(&a), anchor, offset })
    }

    pub fn isotropic(dim: usize, mu: f64) -> Self {
        Self { a: Matrix::identity(dim, dim) * mu, anchor: Point::zeros(dim), offset: 0.0 }
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.anchor.len()
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        let r = x - &self.anchor;
        Ok(0.5 * r.dot(&(&self.a * &r)) + self.offset)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(&self.a * (x - &self.anchor))
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(self.a.clone())
    }
}

/// `<s, x> + offset`.
#[derive(Debug, Clone)]
pub struct LinearObjective {
    pub slope: Point,
    pub offset: f64,
}

impl Objective for LinearObjective {
    fn dim(&self) -> usize {
        self.slope.len()
    }
    fn name(&self) -> String {
        "linear".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(self.slope.dot(x) + self.offset)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(self.slope.clone())
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::zeros(x.len(), x.len()))
    }
}

/// `sum_i amplitude * sin(frequency * x_i)`; smooth with constant
/// `amplitude * frequency^2`.
#[derive(Debug, Clone)]
pub struct SinObjective {
    pub dim: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Objective for SinObjective {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "sin".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(x.iter().map(|v| self.amplitude * (self.frequency * v).sin()).sum())
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(x.map(|v| self.amplitude * self.frequency * (self.frequency * v).cos()))
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        let w = self.amplitude * self.frequency * self.frequency;
        Ok(Matrix::from_diagonal(&x.map(|v| -w * (self.frequency * v).sin())))
    }
}

/// `sum_i w_i x_i log x_i + <s, x>` on the positive orthant.
#[derive(Debug, Clone)]
pub struct EntropyObjective {
    pub weights: Point,
    pub slope: Point,
}

impl Objective for EntropyObjective {
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn name(&self) -> String {
        "weighted_entropy".into()
    }
    fn in_domain(&self, x: &Point) -> bool {
        x.len() == self.dim() && x.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(x.iter().zip(self.weights.iter()).map(|(v, w)| w * v * v.ln()).sum::<f64>() + self.slope.dot(x))
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(Point::from_iterator(
            x.len(),
            (0..x.len()).map(|i| self.weights[i] * (1.0 + x[i].ln()) + self.slope[i]),
        ))
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::from_diagonal(&x.zip_map(&self.weights, |v, w| w / v)))
    }
}

/// Pointwise sum of objectives of equal dimension.
#[derive(Debug, Clone)]
pub struct SumObjective {
    pub terms: Vec<ObjectiveRef>,
}

impl SumObjective {
    pub fn new(terms: Vec<ObjectiveRef>) -> Result<Self> {
        let d = terms.first().map(|t| t.dim()).ok_or_else(|| Error::InvalidParameter("empty sum".into()))?;
        for t in &terms {
            check_dim(d, t.dim())?;
        }
        Ok(Self { terms })
    }
}

impl Objective for SumObjective {
    fn dim(&self) -> usize {
        self.terms[0].dim()
    }
    fn name(&self) -> String {
        self.terms.iter().map(|t| t.name()).collect::<Vec<_>>().join("+")
    }
    fn in_domain(&self, x: &Point) -> bool {
        self.terms.iter().all(|t| t.in_domain(x))
    }
    fn value(&self, x: &Point) -> Result<f64> {
        self.terms.iter().map(|t| t.value(x)).sum()
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        let mut g = Point::zeros(x.len());
        for t in &self.terms {
            g += t.gradient(x)?;
        }
        Ok(g)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        let mut h = Matrix::zeros(x.len(), x.len());
        for t in &self.terms {
            h += t.hessian(x)?;
        }
        Ok(h)
    }
}

/// `scale * f`.
#[derive(Debug, Clone)]
pub struct ScaledObjective {
    pub inner: ObjectiveRef,
    pub scale: f64,
}

impl Objective for ScaledObjective {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("{}*{}", self.scale, self.inner.name())
    }
    fn in_domain(&self, x: &Point) -> bool {
        self.inner.in_domain(x)
    }
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(self.scale * self.inner.value(x)?)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        Ok(self.inner.gradient(x)? * self.scale)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        Ok(self.inner.hessian(x)? * self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    fn check_derivatives(f: &dyn Objective, x: &Point) {
        let g = f.gradient(x).unwrap();
        let gfd = fd::fd_gradient(|z| f.value(z), x, None).unwrap();
        assert!((&g - &gfd).amax() <= 1e-6 * (1.0 + g.amax()), "{}", f.name());
        let h = f.hessian(x).unwrap();
        let hfd = fd::fd_jacobian(|z| f.gradient(z), x, None).unwrap();
        assert!(fd::relative_error(&h, &hfd) < 1e-6, "{}", f.name());
    }

    #[test]
    fn builtin_derivatives_match_finite_differences() {
        let x = point(&[0.7, 1.3]);
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        check_derivatives(&QuadraticObjective::new(a, point(&[0.1, -0.2]), 1.0).unwrap(), &x);
        check_derivatives(&LinearObjective { slope: point(&[1.0, -2.0]), offset: 0.5 }, &x);
        check_derivatives(&SinObjective { dim: 2, amplitude: 1.0, frequency: 1.0 }, &x);
        check_derivatives(&EntropyObjective { weights: point(&[0.5, 0.8]), slope: point(&[0.1, 0.0]) }, &x);
    }

    #[test]
    fn entropy_objective_rejects_nonpositive_points() {
        let f = EntropyObjective { weights: point(&[1.0]), slope: point(&[0.0]) };
        assert!(matches!(f.value(&point(&[-1.0])), Err(Error::Domain(_))));
    }
}
