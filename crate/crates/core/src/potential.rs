//! Strictly convex potentials `u` generating Bregman-type costs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::{solve_spd, symmetrize, Matrix, Point};
use crate::objective::{ensure, Objective};

pub trait ConvexPotential: Objective {
    /// `T[j][k] = sum_i u_ijk(x) v_i`, the third derivative contracted with `v`.
    fn third_contract(&self, x: &Point, v: &Point) -> Result<Matrix> {
        let h = fd::default_step(x) / v.norm().max(1e-300);
        let d = |h: f64| -> Result<Matrix> {
            let p = self.hessian(&(x + v * h))?;
            let m = self.hessian(&(x - v * h))?;
            Ok((p - m) / (2.0 * h))
        };
        let coarse = d(h)?;
        let fine = d(h / 2.0)?;
        Ok(symmetrize(&((fine * 4.0 - coarse) / 3.0)))
    }

    /// Whether `third_contract` is analytic.
    fn analytic_third(&self) -> bool {
        false
    }

    /// A point in the interior of the domain, used to start numeric solves.
    fn interior_point(&self) -> Point {
        Point::zeros(self.dim())
    }

    /// Inverse of the gradient map, `(grad u)^{-1}(z)`.
    fn grad_inverse(&self, z: &Point) -> Result<Point> {
        numeric_grad_inverse(self, z, &self.interior_point())
    }

    /// Convex conjugate `u*(z) = sup_x <z, x> - u(x)`.
    fn conjugate(&self, z: &Point) -> Result<f64> {
        let x = self
            .grad_inverse(z)
            .map_err(|e| Error::ConjugateUnavailable(format!("{}: {e}", self.name())))?;
        Ok(z.dot(&x) - self.value(&x)?)
    }

    /// Bregman divergence `u(x | y) = u(x) - u(y) - <grad u(y), x - y>`.
    fn divergence(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.value(x)? - self.value(y)? - self.gradient(y)?.dot(&(x - y)))
    }
}

pub type PotentialRef = Arc<dyn ConvexPotential>;

/// Damped Newton on `u(x) - <z, x>`.
pub fn numeric_grad_inverse<P: ConvexPotential + ?Sized>(u: &P, z: &Point, start: &Point) -> Result<Point> {
    let psi = |x: &Point| -> Result<f64> { Ok(u.value(x)? - z.dot(x)) };
    let mut x = start.clone();
    let tol = 1e-12 * (1.0 + z.amax());
    for _ in 0..200 {
        let r = u.gradient(&x)? - z;
        if r.amax() <= tol {
            return Ok(x);
        }
        let step = solve_spd(&u.hessian(&x)?, &r)?;
        let p0 = psi(&x)?;
        let slope = -r.dot(&step);
        let mut t = 1.0;
        loop {
            let cand = &x - &step * t;
            if u.in_domain(&cand) {
                let ok = match (psi(&cand), u.gradient(&cand)) {
                    (Ok(p), Ok(g)) => p <= p0 + 1e-4 * t * slope || (g - z).norm() < (1.0 - 1e-4 * t) * r.norm(),
                    _ => false,
                };
                if ok {
                    x = cand;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                let r = u.gradient(&x)? - z;
                if r.amax() <= 1e-8 * (1.0 + z.amax()) {
                    return Ok(x);
                }
                return Err(Error::NoConvergence { what: "gradient inverse".into(), iterations: 200 });
            }
        }
    }
    Err(Error::NoConvergence { what: "gradient inverse".into(), iterations: 200 })
}

/// `L/2 |x - a|^2`.
#[derive(Debug, Clone)]
pub struct QuadraticPotential {
    pub l: f64,
    pub anchor: Point,
}

impl QuadraticPotential {
    pub fn new(dim: usize, l: f64) -> Self {
        Self { l, anchor: Point::zeros(dim) }
    }
}

impl Objective for QuadraticPotential {
    fn dim(&self) -> usize {
        self.anchor.len()
    }
    fn name(&self) -> String {
        "quadratic".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(0.5 * self.l * (x - &self.anchor).norm_squared())
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok((x - &self.anchor) * self.l)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::identity(x.len(), x.len()) * self.l)
    }
}

impl ConvexPotential for QuadraticPotential {
    fn third_contract(&self, x: &Point, _v: &Point) -> Result<Matrix> {
        Ok(Matrix::zeros(x.len(), x.len()))
    }
    fn analytic_third(&self) -> bool {
        true
    }
    fn interior_point(&self) -> Point {
        self.anchor.clone()
    }
    fn grad_inverse(&self, z: &Point) -> Result<Point> {
        ensure(self, z)?;
        Ok(z / self.l + &self.anchor)
    }
    fn conjugate(&self, z: &Point) -> Result<f64> {
        ensure(self, z)?;
        Ok(z.dot(&self.anchor) + z.norm_squared() / (2.0 * self.l))
    }
}

/// `sum_i x_i log x_i` on the positive orthant.
#[derive(Debug, Clone)]
pub struct NegativeEntropy {
    pub dim: usize,
}

impl Objective for NegativeEntropy {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "negative_entropy".into()
    }
    fn in_domain(&self, x: &Point) -> bool {
        x.len() == self.dim && x.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(x.iter().map(|v| v * v.ln()).sum())
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(x.map(|v| 1.0 + v.ln()))
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::from_diagonal(&x.map(|v| 1.0 / v)))
    }
}

impl ConvexPotential for NegativeEntropy {
    fn third_contract(&self, x: &Point, v: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::from_diagonal(&v.zip_map(x, |vi, xi| -vi / (xi * xi))))
    }
    fn analytic_third(&self) -> bool {
        true
    }
    fn interior_point(&self) -> Point {
        Point::from_element(self.dim, 1.0)
    }
    fn grad_inverse(&self, z: &Point) -> Result<Point> {
        let x = z.map(|v| (v - 1.0).exp());
        if x.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(x)
        } else {
            Err(Error::Domain("gradient inverse of negative entropy".into()))
        }
    }
    fn conjugate(&self, z: &Point) -> Result<f64> {
        Ok(z.iter().map(|v| (v - 1.0).exp()).sum())
    }
}

/// `log sum_i exp(x_i) + ridge/2 |x|^2`; the ridge makes it strictly convex.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    pub dim: usize,
    pub ridge: f64,
}

impl LogSumExp {
    fn softmax(x: &Point) -> (f64, Point) {
        let m = x.max();
        let e = x.map(|v| (v - m).exp());
        let s = e.sum();
        (m + s.ln(), e / s)
    }
}

impl Objective for LogSumExp {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "log_sum_exp".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(Self::softmax(x).0 + 0.5 * self.ridge * x.norm_squared())
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(Self::softmax(x).1 + x * self.ridge)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        let p = Self::softmax(x).1;
        Ok(Matrix::from_diagonal(&p) - &p * p.transpose() + Matrix::identity(x.len(), x.len()) * self.ridge)
    }
}

impl ConvexPotential for LogSumExp {
    fn third_contract(&self, x: &Point, v: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        let p = Self::softmax(x).1;
        let vbar = p.dot(v);
        let pw = p.zip_map(v, |pi, vi| pi * (vi - vbar));
        Ok(Matrix::from_diagonal(&pw) - &pw * p.transpose() - &p * pw.transpose())
    }
    fn analytic_third(&self) -> bool {
        true
    }
}

/// `sum_i exp(x_i) + ridge/2 |x|^2`.
#[derive(Debug, Clone)]
pub struct SumExp {
    pub dim: usize,
    pub ridge: f64,
}

impl Objective for SumExp {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> String {
        "sum_exp".into()
    }
    fn value(&self, x: &Point) -> Result<f64> {
        ensure(self, x)?;
        Ok(x.iter().map(|v| v.exp()).sum::<f64>() + 0.5 * self.ridge * x.norm_squared())
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        ensure(self, x)?;
        Ok(x.map(|v| v.exp()) + x * self.ridge)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::from_diagonal(&x.map(|v| v.exp() + self.ridge)))
    }
}

impl ConvexPotential for SumExp {
    fn third_contract(&self, x: &Point, v: &Point) -> Result<Matrix> {
        ensure(self, x)?;
        Ok(Matrix::from_diagonal(&x.zip_map(v, |xi, vi| xi.exp() * vi)))
    }
    fn analytic_third(&self) -> bool {
        true
    }
    fn grad_inverse(&self, z: &Point) -> Result<Point> {
        if self.ridge != 0.0 {
            return numeric_grad_inverse(self, z, &self.interior_point());
        }
        if z.iter().all(|v| *v > 0.0) {
            Ok(z.map(f64::ln))
        } else {
            Err(Error::Domain("gradient inverse of sum_exp needs positive input".into()))
        }
    }
    fn conjugate(&self, z: &Point) -> Result<f64> {
        if self.ridge != 0.0 {
            let x = self.grad_inverse(z).map_err(|e| Error::ConjugateUnavailable(e.to_string()))?;
            return Ok(z.dot(&x) - self.value(&x)?);
        }
        if z.iter().all(|v| *v >= 0.0) {
            Ok(z.iter().map(|v| if *v == 0.0 { 0.0 } else { v * v.ln() - v }).sum())
        } else {
            Err(Error::ConjugateUnavailable("sum_exp conjugate is infinite off the orthant".into()))
        }
    }
}

/// Treats any objective with a positive definite Hessian as a potential,
/// using numeric third derivatives and gradient inverse.
#[derive(Debug, Clone)]
pub struct ObjectivePotential(pub Arc<dyn Objective>);

impl Objective for ObjectivePotential {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn name(&self) -> String {
        self.0.name()
    }
    fn in_domain(&self, x: &Point) -> bool {
        self.0.in_domain(x)
    }
    fn value(&self, x: &Point) -> Result<f64> {
        self.0.value(x)
    }
    fn gradient(&self, x: &Point) -> Result<Point> {
        self.0.gradient(x)
    }
    fn hessian(&self, x: &Point) -> Result<Matrix> {
        self.0.hessian(x)
    }
}

impl ConvexPotential for ObjectivePotential {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    fn potentials() -> Vec<(Box<dyn ConvexPotential>, Point)> {
        vec![
            (Box::new(QuadraticPotential { l: 2.0, anchor: point(&[0.5, -1.0]) }), point(&[0.3, 0.7])),
            (Box::new(NegativeEntropy { dim: 2 }), point(&[0.3, 1.7])),
            (Box::new(LogSumExp { dim: 2, ridge: 0.5 }), point(&[0.3, -0.7])),
            (Box::new(SumExp { dim: 2, ridge: 0.0 }), point(&[0.3, -0.7])),
            (Box::new(SumExp { dim: 2, ridge: 0.2 }), point(&[0.3, -0.7])),
        ]
    }

    #[test]
    fn third_derivatives_match_finite_differences() {
        let v = point(&[0.4, -1.1]);
        for (u, x) in potentials() {
            let t = u.third_contract(&x, &v).unwrap();
            let h = 1e-4;
            let fd = (u.hessian(&(&x + &v * h)).unwrap() - u.hessian(&(&x - &v * h)).unwrap()) / (2.0 * h);
            assert!(fd::relative_error(&t, &fd) < 1e-6, "{}", u.name());
        }
    }

    #[test]
    fn gradient_inverse_round_trips() {
        for (u, x) in potentials() {
            let z = u.gradient(&x).unwrap();
            let back = u.grad_inverse(&z).unwrap();
            assert!((back - &x).amax() < 1e-9, "{}", u.name());
        }
    }

    #[test]
    fn conjugate_satisfies_fenchel_equality() {
        for (u, x) in potentials() {
            let z = u.gradient(&x).unwrap();
            let lhs = u.value(&x).unwrap() + u.conjugate(&z).unwrap();
            assert!((lhs - z.dot(&x)).abs() < 1e-9, "{}", u.name());
        }
    }

    #[test]
    fn negative_entropy_conjugate_at_zero() {
        let u = NegativeEntropy { dim: 1 };
        assert!((u.conjugate(&point(&[0.0])).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }
}
