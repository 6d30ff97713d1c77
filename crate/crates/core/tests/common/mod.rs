//! Cost catalog and samplers shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use gencost::costs::{
    bregman_cost, exponential_kernel_cost, fenchel_young_cost, log_divergence_cost, mapped_quadratic_cost,
    quadratic_cost, reverse_bregman_cost, tensor_product_cost, CostRef, ExpMap, SinhMap,
};
use gencost::linalg::{Matrix, Point};
use gencost::potential::{LogSumExp, NegativeEntropy, PotentialRef, QuadraticPotential, SumExp};
use gencost::rng;
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub cost: CostRef,
    pub x_box: Vec<(f64, f64)>,
    pub y_box: Vec<(f64, f64)>,
}

impl Case {
    fn cube(cost: CostRef, lo: f64, hi: f64) -> Self {
        let (dx, dy) = (cost.dim_x(), cost.dim_y());
        Self { cost, x_box: vec![(lo, hi); dx], y_box: vec![(lo, hi); dy] }
    }

    /// A pair in the cost's domain.
    pub fn sample(&self, r: &mut ChaCha8Rng) -> (Point, Point) {
        loop {
            let x = rng::uniform_in_box(r, &self.x_box);
            let y = rng::uniform_in_box(r, &self.y_box);
            if self.cost.in_domain(&x, &y) {
                return (x, y);
            }
        }
    }
}

pub fn entropy(dim: usize) -> PotentialRef {
    Arc::new(NegativeEntropy { dim })
}

/// Potentials with the box their samples come from.
pub fn potentials() -> Vec<(PotentialRef, f64, f64)> {
    vec![
        (Arc::new(QuadraticPotential::new(2, 1.5)), -1.0, 1.0),
        (entropy(3), 0.2, 2.0),
        (Arc::new(LogSumExp { dim: 3, ridge: 0.1 }), -1.0, 1.0),
        (Arc::new(SumExp { dim: 2, ridge: 0.5 }), -1.0, 1.0),
    ]
}

/// Builtin cost families on the Euclidean spaces.
pub fn catalog() -> Vec<Case> {
    let kernel = Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.2, 0.8]);
    let mut fy = Case::cube(fenchel_young_cost(entropy(2)), 0.2, 2.0);
    fy.y_box = vec![(-1.0, 1.0); 2];
    vec![
        Case::cube(quadratic_cost(3, 1.5), -2.0, 2.0),
        Case::cube(bregman_cost(entropy(3)), 0.2, 2.0),
        Case::cube(bregman_cost(Arc::new(LogSumExp { dim: 3, ridge: 0.1 })), -1.0, 1.0),
        Case::cube(bregman_cost(Arc::new(SumExp { dim: 2, ridge: 0.5 })), -1.0, 1.0),
        Case::cube(reverse_bregman_cost(entropy(2)), 0.2, 2.0),
        Case::cube(reverse_bregman_cost(Arc::new(QuadraticPotential::new(2, 2.0))), -1.0, 1.0),
        fy,
        Case::cube(log_divergence_cost(Arc::new(QuadraticPotential::new(2, 1.0)), 0.5).unwrap(), -0.5, 0.5),
        Case::cube(exponential_kernel_cost(kernel, 1.0).unwrap(), -1.0, 1.0),
        Case::cube(mapped_quadratic_cost(Arc::new(ExpMap { dim: 2 }), Arc::new(SinhMap { dim: 2 })).unwrap(), -1.0, 1.0),
        Case::cube(tensor_product_cost(quadratic_cost(1, 1.0), bregman_cost(entropy(1))).unwrap(), 0.2, 2.0),
    ]
}

/// `max(1, |a|, |b|)`.
pub fn scale(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}
