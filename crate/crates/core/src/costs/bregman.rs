use super::{ensure, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{solve_spd, Matrix, Point};
use crate::potential::PotentialRef;

/// `u(x | y) = u(x) - u(y) - <grad u(y), x - y>`.
#[derive(Debug, Clone)]
pub struct BregmanCost {
    pub u: PotentialRef,
}

impl CostFunction for BregmanCost {
    fn name(&self) -> String {
        format!("bregman({})", self.u.name())
    }
    fn dim_x(&self) -> usize {
        self.u.dim()
    }
    fn dim_y(&self) -> usize {
        self.u.dim()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.u.in_domain(x) && self.u.in_domain(y)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        ensure(self, x, y)?;
        self.u.divergence(x, y)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(self.u.gradient(x)? - self.u.gradient(y)?)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(-(self.u.hessian(y)? * (x - y)))
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        self.u.hessian(x)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(-self.u.hessian(y)?)
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(self.u.hessian(y)? - self.u.third_contract(y, &(x - y))?)
    }
    fn analytic_hessians(&self) -> bool {
        self.u.analytic_third()
    }
    fn third_xx_y(&self, _x: &Point, y: &Point, _xi: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(y.len())))
    }
    fn third_x_yy(&self, x: &Point, y: &Point, eta: &Point) -> Option<Result<Point>> {
        if !self.u.analytic_third() {
            return None;
        }
        Some(ensure(self, x, y).and_then(|_| Ok(-(self.u.third_contract(y, eta)? * eta))))
    }
    fn fourth_xxyy(&self, _x: &Point, _y: &Point, _xi: &Point, _eta: &Point) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some((|| {
            check_dim(self.dim_x(), xi.len())?;
            self.u.grad_inverse(&(self.u.gradient(x)? + xi))
        })())
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(Ok(y.clone()))
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        Some(Ok(x0 * (1.0 - t) + x1 * t))
    }
}

/// `u(y | x) = u(y) - u(x) - <grad u(x), y - x>`.
#[derive(Debug, Clone)]
pub struct ReverseBregmanCost {
    pub u: PotentialRef,
}

impl CostFunction for ReverseBregmanCost {
    fn name(&self) -> String {
        format!("reverse_bregman({})", self.u.name())
    }
    fn dim_x(&self) -> usize {
        self.u.dim()
    }
    fn dim_y(&self) -> usize {
        self.u.dim()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.u.in_domain(x) && self.u.in_domain(y)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        ensure(self, x, y)?;
        self.u.divergence(y, x)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(-(self.u.hessian(x)? * (y - x)))
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(self.u.gradient(y)? - self.u.gradient(x)?)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(self.u.hessian(x)? - self.u.third_contract(x, &(y - x))?)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(-self.u.hessian(x)?)
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        self.u.hessian(y)
    }
    fn analytic_hessians(&self) -> bool {
        self.u.analytic_third()
    }
    fn third_xx_y(&self, x: &Point, y: &Point, xi: &Point) -> Option<Result<Point>> {
        if !self.u.analytic_third() {
            return None;
        }
        Some(ensure(self, x, y).and_then(|_| Ok(-(self.u.third_contract(x, xi)? * xi))))
    }
    fn third_x_yy(&self, x: &Point, _y: &Point, _eta: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(x.len())))
    }
    fn fourth_xxyy(&self, _x: &Point, _y: &Point, _xi: &Point, _eta: &Point) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some((|| {
            check_dim(self.dim_x(), xi.len())?;
            let y = x + solve_spd(&self.u.hessian(x)?, xi)?;
            if self.u.in_domain(&y) {
                Ok(y)
            } else {
                Err(Error::Domain("c-exponential leaves the domain of u".into()))
            }
        })())
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(Ok(y.clone()))
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        Some((|| {
            let z = self.u.gradient(x0)? * (1.0 - t) + self.u.gradient(x1)? * t;
            self.u.grad_inverse(&z)
        })())
    }
}

/// `u(x) + u*(y) - <x, y>`.
#[derive(Debug, Clone)]
pub struct FenchelYoungCost {
    pub u: PotentialRef,
}

impl CostFunction for FenchelYoungCost {
    fn name(&self) -> String {
        format!("fenchel_young({})", self.u.name())
    }
    fn dim_x(&self) -> usize {
        self.u.dim()
    }
    fn dim_y(&self) -> usize {
        self.u.dim()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.u.in_domain(x) && y.len() == self.u.dim() && y.iter().all(|v| v.is_finite())
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        ensure(self, x, y)?;
        Ok(self.u.value(x)? + self.u.conjugate(y)? - x.dot(y))
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(self.u.gradient(x)? - y)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        ensure(self, x, y)?;
        Ok(self.u.grad_inverse(y)? - x)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        self.u.hessian(x)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        Ok(-Matrix::identity(x.len(), x.len()))
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        ensure(self, x, y)?;
        let h = self.u.hessian(&self.u.grad_inverse(y)?)?;
        h.try_inverse().ok_or(Error::SingularHessian)
    }
    fn analytic_hessians(&self) -> bool {
        true
    }
    fn third_xx_y(&self, _x: &Point, y: &Point, _xi: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(y.len())))
    }
    fn third_x_yy(&self, x: &Point, _y: &Point, _eta: &Point) -> Option<Result<Point>> {
        Some(Ok(Point::zeros(x.len())))
    }
    fn fourth_xxyy(&self, _x: &Point, _y: &Point, _xi: &Point, _eta: &Point) -> Option<Result<f64>> {
        Some(Ok(0.0))
    }
    fn c_exp_closed(&self, x: &Point, xi: &Point) -> Option<Result<Point>> {
        Some(check_dim(self.dim_x(), xi.len()).and_then(|_| Ok(self.u.gradient(x)? + xi)))
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(self.u.grad_inverse(y))
    }
    fn segment_closed(&self, x0: &Point, x1: &Point, _y: &Point, t: f64) -> Option<Result<Point>> {
        Some(Ok(x0 * (1.0 - t) + x1 * t))
    }
    fn dual_guess(&self, x: &Point) -> Point {
        self.u.gradient(x).unwrap_or_else(|_| x.clone())
    }
}

/// `u(x) - u(y) + (1/alpha) log(1 - alpha <grad u(y), x - y>)`.
#[derive(Debug, Clone)]
pub struct LogDivergenceCost {
    pub u: PotentialRef,
    pub alpha: f64,
}

impl LogDivergenceCost {
    pub fn new(u: PotentialRef, alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self { u, alpha })
        } else {
            Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")))
        }
    }

    /// `w = 1 - alpha <grad u(y), x - y>`.
    pub fn log_argument(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(1.0 - self.alpha * self.u.gradient(y)?.dot(&(x - y)))
    }

    fn parts(&self, x: &Point, y: &Point) -> Result<(f64, Point, Matrix)> {
        ensure(self, x, y)?;
        let g = self.u.gradient(y)?;
        let w = 1.0 - self.alpha * g.dot(&(x - y));
        Ok((w, g, self.u.hessian(y)?))
    }
}

impl CostFunction for LogDivergenceCost {
    fn name(&self) -> String {
        format!("log_divergence({}, alpha={})", self.u.name(), self.alpha)
    }
    fn dim_x(&self) -> usize {
        self.u.dim()
    }
    fn dim_y(&self) -> usize {
        self.u.dim()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.u.in_domain(x)
            && self.u.in_domain(y)
            && matches!(self.log_argument(x, y), Ok(w) if w > 0.0)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        let (w, _, _) = self.parts(x, y)?;
        Ok(self.u.value(x)? - self.u.value(y)? + w.ln() / self.alpha)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        let (w, g, _) = self.parts(x, y)?;
        Ok(self.u.gradient(x)? - g / w)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        let (w, g, h) = self.parts(x, y)?;
        let v = &g - h * (x - y);
        Ok(v / w - g)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (w, g, _) = self.parts(x, y)?;
        Ok(self.u.hessian(x)? - &g * g.transpose() * (self.alpha / (w * w)))
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (w, g, h) = self.parts(x, y)?;
        let v = &g - &h * (x - y);
        Ok(-h / w + &g * v.transpose() * (self.alpha / (w * w)))
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        let (w, g, h) = self.parts(x, y)?;
        let d = x - y;
        let v = &g - &h * &d;
        let t = self.u.third_contract(y, &d)?;
        Ok(-&h + (h * 2.0 - t) / w - &v * v.transpose() * (self.alpha / (w * w)))
    }
    fn analytic_hessians(&self) -> bool {
        self.u.analytic_third()
    }
    fn x_argmin_closed(&self, y: &Point) -> Option<Result<Point>> {
        Some(Ok(y.clone()))
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::testing::{assert_derivatives, assert_higher_derivatives};
    use crate::linalg::point;
    use crate::potential::{LogSumExp, NegativeEntropy, QuadraticPotential, SumExp};
    use std::sync::Arc;

    fn potentials() -> Vec<PotentialRef> {
        vec![
            Arc::new(QuadraticPotential { l: 1.5, anchor: point(&[0.2, 0.1]) }),
            Arc::new(NegativeEntropy { dim: 2 }),
            Arc::new(LogSumExp { dim: 2, ridge: 0.5 }),
            Arc::new(SumExp { dim: 2, ridge: 0.0 }),
        ]
    }

    #[test]
    fn bregman_family_derivatives() {
        let (x, y) = (point(&[0.6, 1.3]), point(&[0.9, 0.7]));
        let (xi, eta) = (point(&[0.4, -0.3]), point(&[-0.2, 0.5]));
        for u in potentials() {
            let costs: Vec<Box<dyn CostFunction>> = vec![
                Box::new(BregmanCost { u: u.clone() }),
                Box::new(ReverseBregmanCost { u: u.clone() }),
                Box::new(LogDivergenceCost::new(u.clone(), 0.3).unwrap()),
            ];
            for c in costs {
                assert_derivatives(c.as_ref(), &x, &y, 1e-6);
                assert_higher_derivatives(c.as_ref(), &x, &y, &xi, &eta);
            }
            let fy = FenchelYoungCost { u: u.clone() };
            let yd = u.gradient(&y).unwrap();
            assert_derivatives(&fy, &x, &yd, 1e-6);
        }
    }

    #[test]
    fn fenchel_young_entropy_example() {
        let c = FenchelYoungCost { u: Arc::new(NegativeEntropy { dim: 1 }) };
        let v = c.value(&point(&[1.0]), &point(&[0.0])).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn c_exponential_closed_forms_solve_the_first_order_condition() {
        let x = point(&[0.6, 1.3]);
        let xi = point(&[0.1, -0.2]);
        for u in potentials() {
            let costs: Vec<Box<dyn CostFunction>> = vec![
                Box::new(BregmanCost { u: u.clone() }),
                Box::new(ReverseBregmanCost { u: u.clone() }),
                Box::new(FenchelYoungCost { u: u.clone() }),
            ];
            for c in costs {
                let y = c.c_exp_closed(&x, &xi).unwrap().unwrap();
                let r = c.grad_x(&x, &y).unwrap() + &xi;
                assert!(r.amax() < 1e-9, "{}", c.name());
            }
        }
    }

    #[test]
    fn log_divergence_domain_is_enforced() {
        let c = LogDivergenceCost::new(Arc::new(QuadraticPotential::new(1, 1.0)), 1.0).unwrap();
        assert!(matches!(c.value(&point(&[3.0]), &point(&[1.0])), Err(Error::Domain(_))));
        assert!(LogDivergenceCost::new(Arc::new(QuadraticPotential::new(1, 1.0)), 0.0).is_err());
    }
}
