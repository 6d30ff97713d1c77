mod common;

use std::sync::Arc;

use common::{catalog, potentials, scale, Case};
use gencost::costs::{bregman_cost, fenchel_young_cost, reverse_bregman_cost, CostFunction, CostRef};
use gencost::fd::{fd_hessian, fd_mixed_hessian, relative_error};
use gencost::geometry::{c_exponential, c_segment, cross_curvature, cross_difference};
use gencost::linalg::{Matrix, Point};
use gencost::objective::{ObjectiveRef, QuadraticObjective, SinObjective};
use gencost::rng;
use gencost::Result;
use proptest::prelude::*;

#[test]
fn bregman_type_costs_vanish_on_the_diagonal_and_are_nonnegative() {
    for (u, lo, hi) in potentials() {
        for c in [bregman_cost(u.clone()), reverse_bregman_cost(u.clone())] {
            let mut r = rng::stream(1, 0);
            let bx = vec![(lo, hi); u.dim()];
            for _ in 0..500 {
                let x = rng::uniform_in_box(&mut r, &bx);
                let y = rng::uniform_in_box(&mut r, &bx);
                assert!(c.value(&x, &x).unwrap().abs() <= 1e-12, "{}", c.name());
                assert!(c.value(&x, &y).unwrap() >= -1e-12, "{}", c.name());
            }
        }
    }
}

#[test]
fn fenchel_young_agrees_with_bregman_in_gradient_coordinates() {
    for (u, lo, hi) in potentials() {
        let (fy, b) = (fenchel_young_cost(u.clone()), bregman_cost(u.clone()));
        let mut r = rng::stream(2, 0);
        let bx = vec![(lo, hi); u.dim()];
        for _ in 0..200 {
            let x = rng::uniform_in_box(&mut r, &bx);
            let yt = rng::uniform_in_box(&mut r, &bx);
            let a = fy.value(&x, &u.gradient(&yt).unwrap()).unwrap();
            let e = b.value(&x, &yt).unwrap();
            assert!((a - e).abs() <= 1e-8 * scale(a, e), "{}: {a} vs {e}", u.name());
        }
    }
}

#[test]
fn mixed_hessian_matches_finite_differences_and_is_nonsingular() {
    for (k, case) in catalog().iter().enumerate() {
        let c = &case.cost;
        let mut r = rng::stream(3, k as u64);
        for _ in 0..200 {
            let (x, y) = case.sample(&mut r);
            let m = c.hess_xy(&x, &y).unwrap();
            let fd = fd_mixed_hessian(|a, b| c.value(a, b), &x, &y, None).unwrap();
            assert!(relative_error(&m, &fd) <= 1e-4, "{} at {x:?} {y:?}", c.name());
            let sv = m.singular_values();
            assert!(sv.min() > 1e-8 * sv.max().max(1.0), "{} singular at {x:?} {y:?}", c.name());
        }
    }
}

#[test]
fn c_exponential_solves_its_defining_equation() {
    for (k, case) in catalog().iter().enumerate() {
        let c = &case.cost;
        let mut r = rng::stream(4, k as u64);
        for _ in 0..50 {
            let (x, y0) = case.sample(&mut r);
            let xi = -c.grad_x(&x, &y0).unwrap();
            let y = c_exponential(c.as_ref(), &x, &xi).unwrap();
            let residual = (c.grad_x(&x, &y).unwrap() + &xi).norm();
            assert!(residual <= 1e-8 * xi.norm().max(1.0), "{}: residual {residual:e}", c.name());
        }
    }
}

#[test]
fn dual_gradient_is_affine_along_horizontal_segments() {
    for (k, case) in catalog().iter().enumerate() {
        let c = &case.cost;
        let mut r = rng::stream(5, k as u64);
        for _ in 0..5 {
            let (x0, y) = case.sample(&mut r);
            let (x1, _) = case.sample(&mut r);
            let Ok(seg) = c_segment(c.as_ref(), &x0, &x1, &y) else { continue };
            let g: Vec<Point> = seg.points.iter().map(|p| c.grad_y(p, &y).unwrap()).collect();
            let span = g.iter().map(|v| v.amax()).fold(1.0, f64::max);
            for w in g.windows(3) {
                let second = (&w[2] - &w[1] * 2.0 + &w[0]).amax();
                assert!(second <= 1e-5 * span, "{}: second difference {second:e}", c.name());
            }
        }
    }
}

/// `c(x, y) + g(x) + h(y)` with analytic derivatives.
#[derive(Debug)]
struct PlusSeparable {
    c: CostRef,
    g: ObjectiveRef,
    h: ObjectiveRef,
}

impl CostFunction for PlusSeparable {
    fn name(&self) -> String {
        format!("{}+separable", self.c.name())
    }
    fn dim_x(&self) -> usize {
        self.c.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.c.dim_y()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.c.in_domain(x, y)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.c.value(x, y)? + self.g.value(x)? + self.h.value(y)?)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        Ok(self.c.grad_x(x, y)? + self.g.gradient(x)?)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        Ok(self.c.grad_y(x, y)? + self.h.gradient(y)?)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(self.c.hess_xx(x, y)? + self.g.hessian(x)?)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        self.c.hess_xy(x, y)
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(self.c.hess_yy(x, y)? + self.h.hessian(y)?)
    }
    fn analytic_hessians(&self) -> bool {
        self.c.analytic_hessians()
    }
}

/// `c~(y, x) = c(x, y)`.
#[derive(Debug)]
struct Swapped(CostRef);

impl CostFunction for Swapped {
    fn name(&self) -> String {
        format!("swapped {}", self.0.name())
    }
    fn dim_x(&self) -> usize {
        self.0.dim_y()
    }
    fn dim_y(&self) -> usize {
        self.0.dim_x()
    }
    fn in_domain(&self, x: &Point, y: &Point) -> bool {
        self.0.in_domain(y, x)
    }
    fn value(&self, x: &Point, y: &Point) -> Result<f64> {
        self.0.value(y, x)
    }
    fn grad_x(&self, x: &Point, y: &Point) -> Result<Point> {
        self.0.grad_y(y, x)
    }
    fn grad_y(&self, x: &Point, y: &Point) -> Result<Point> {
        self.0.grad_x(y, x)
    }
    fn hess_xx(&self, x: &Point, y: &Point) -> Result<Matrix> {
        self.0.hess_yy(y, x)
    }
    fn hess_xy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        Ok(self.0.hess_xy(y, x)?.transpose())
    }
    fn hess_yy(&self, x: &Point, y: &Point) -> Result<Matrix> {
        self.0.hess_xx(y, x)
    }
    fn analytic_hessians(&self) -> bool {
        self.0.analytic_hessians()
    }
}

fn curved_cases() -> Vec<Case> {
    // Reverse Bregman, log-divergence, exponential kernel and mapped quadratic.
    catalog().into_iter().enumerate().filter(|(i, _)| [4, 7, 8, 9].contains(i)).map(|(_, c)| c).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-2)
}

#[test]
fn cross_curvature_ignores_separable_terms() {
    for (k, case) in curved_cases().into_iter().enumerate() {
        let (dx, dy) = (case.cost.dim_x(), case.cost.dim_y());
        let plus = PlusSeparable {
            c: case.cost.clone(),
            g: Arc::new(SinObjective { dim: dx, amplitude: 0.7, frequency: 1.3 }),
            h: Arc::new(QuadraticObjective::new(Matrix::identity(dy, dy) * 0.4, Point::from_element(dy, 0.2), 0.0).unwrap()),
        };
        let mut r = rng::stream(6, k as u64);
        for _ in 0..20 {
            let (x, y) = case.sample(&mut r);
            let xi = rng::unit_vector(&mut r, dx);
            let eta = rng::unit_vector(&mut r, dy);
            let a = cross_curvature(case.cost.as_ref(), &x, &y, &xi, &eta).unwrap().value;
            let b = cross_curvature(&plus, &x, &y, &xi, &eta).unwrap().value;
            assert!(close(a, b, 1e-3), "{}: {a} vs {b}", case.cost.name());
        }
    }
}

#[test]
fn cross_curvature_is_symmetric_under_swapping_the_spaces() {
    for (k, case) in curved_cases().into_iter().enumerate() {
        let swapped = Swapped(case.cost.clone());
        let mut r = rng::stream(7, k as u64);
        for _ in 0..20 {
            let (x, y) = case.sample(&mut r);
            let xi = rng::unit_vector(&mut r, case.cost.dim_x());
            let eta = rng::unit_vector(&mut r, case.cost.dim_y());
            let a = cross_curvature(case.cost.as_ref(), &x, &y, &xi, &eta).unwrap().value;
            let b = cross_curvature(&swapped, &y, &x, &eta, &xi).unwrap().value;
            assert!(close(a, b, 1e-3), "{}: {a} vs {b}", case.cost.name());
        }
    }
}

fn in_box(case: &Case, seed: u64) -> (Point, Point, Point, Point) {
    let mut r = rng::stream(seed, 0);
    let (x, y) = case.sample(&mut r);
    let (xp, yp) = case.sample(&mut r);
    (xp, yp, x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn cross_difference_symmetries(k in 0usize..11, seed in any::<u64>()) {
        let cases = catalog();
        let case = &cases[k];
        let c = case.cost.as_ref();
        let (xp, yp, x, y) = in_box(case, seed);
        if c.in_domain(&x, &yp) && c.in_domain(&xp, &y) {
            let d = cross_difference(c, &xp, &yp, &x, &y).unwrap();
            let interchanged = cross_difference(c, &x, &y, &xp, &yp).unwrap();
            let first_third = cross_difference(c, &x, &yp, &xp, &y).unwrap();
            let second_fourth = cross_difference(c, &xp, &y, &x, &yp).unwrap();
            let tol = 1e-12 * scale(c.value(&x, &y).unwrap(), c.value(&xp, &yp).unwrap()) * 10.0;
            prop_assert!((d - interchanged).abs() <= tol);
            prop_assert!((d + first_third).abs() <= tol);
            prop_assert!((d + second_fourth).abs() <= tol);
        }
    }

    #[test]
    fn finite_difference_hessian_is_exactly_symmetric(
        a in prop::collection::vec(-2.0f64..2.0, 3),
        w in prop::collection::vec(0.1f64..2.0, 3),
    ) {
        let x = Point::from_vec(a);
        let f = |z: &Point| -> Result<f64> {
            Ok((z[0] * z[1]).sin() * w[0] + (z[1] - z[2]).exp() * w[1] + z[0].powi(2) * z[2] * w[2])
        };
        let h = fd_hessian(f, &x, None).unwrap();
        prop_assert_eq!(h.clone(), h.transpose());
    }
}
