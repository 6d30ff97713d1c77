//! Construction of library objects from configuration specs.

use std::sync::Arc;

use gencost::costs::{
    bregman_cost, exponential_kernel_cost, fenchel_young_cost, log_divergence_cost, mapped_quadratic_cost,
    quadratic_cost, reverse_bregman_cost, sphere_cost, tensor_product_cost, AffineMap, CostRef, Diffeo, ExpMap,
    SinhMap,
};
use gencost::linalg::{Matrix, Point};
use gencost::objective::{
    EntropyObjective, LinearObjective, ObjectiveRef, QuadraticObjective, ScaledObjective, SinObjective, SumObjective,
};
use gencost::potential::{LogSumExp, NegativeEntropy, ObjectivePotential, PotentialRef, QuadraticPotential, SumExp};

use crate::config::{CostSpec, MapSpec, ObjectiveSpec, PotentialSpec};
use crate::error::{CliError, Result};

pub fn matrix(rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Config("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn vector(v: &[f64]) -> Point {
    Point::from_column_slice(v)
}

pub fn potential(spec: &PotentialSpec) -> Result<PotentialRef> {
    Ok(match spec {
        PotentialSpec::Quadratic { dim, l, anchor } => {
            let mut u = QuadraticPotential::new(*dim, *l);
            if let Some(a) = anchor {
                if a.len() != *dim {
                    return Err(CliError::Config("potential anchor has the wrong dimension".into()));
                }
                u.anchor = vector(a);
            }
            Arc::new(u)
        }
        PotentialSpec::NegativeEntropy { dim } => Arc::new(NegativeEntropy { dim: *dim }),
        PotentialSpec::LogSumExp { dim, ridge } => Arc::new(LogSumExp { dim: *dim, ridge: *ridge }),
        PotentialSpec::SumExp { dim, ridge } => Arc::new(SumExp { dim: *dim, ridge: *ridge }),
        PotentialSpec::Objective { objective: o } => Arc::new(ObjectivePotential(objective(o)?)),
    })
}

fn diffeo(spec: &MapSpec) -> Result<Arc<dyn Diffeo>> {
    Ok(match spec {
        MapSpec::Identity { dim } => Arc::new(AffineMap::identity(*dim)),
        MapSpec::Affine { m, b } => Arc::new(AffineMap { m: matrix(m)?, b: vector(b) }),
        MapSpec::Exp { dim } => Arc::new(ExpMap { dim: *dim }),
        MapSpec::Sinh { dim } => Arc::new(SinhMap { dim: *dim }),
    })
}

pub fn cost(spec: &CostSpec) -> Result<CostRef> {
    Ok(match spec {
        CostSpec::Quadratic { dim, l } => quadratic_cost(*dim, *l),
        CostSpec::Bregman { potential: p } => bregman_cost(potential(p)?),
        CostSpec::ReverseBregman { potential: p } => reverse_bregman_cost(potential(p)?),
        CostSpec::FenchelYoung { potential: p } => fenchel_young_cost(potential(p)?),
        CostSpec::LogDivergence { potential: p, alpha } => log_divergence_cost(potential(p)?, *alpha)?,
        CostSpec::ExponentialKernel { k, eps } => exponential_kernel_cost(matrix(k)?, *eps)?,
        CostSpec::Sphere { dim, l } => sphere_cost(*dim, *l),
        CostSpec::MappedQuadratic { a, b } => mapped_quadratic_cost(diffeo(a)?, diffeo(b)?)?,
        CostSpec::TensorProduct { first, second } => tensor_product_cost(cost(first)?, cost(second)?)?,
    })
}

pub fn objective(spec: &ObjectiveSpec) -> Result<ObjectiveRef> {
    Ok(match spec {
        ObjectiveSpec::Quadratic { a, anchor, offset } => {
            Arc::new(QuadraticObjective::new(matrix(a)?, vector(anchor), *offset)?)
        }
        ObjectiveSpec::Isotropic { dim, mu } => Arc::new(QuadraticObjective::isotropic(*dim, *mu)),
        ObjectiveSpec::Linear { slope, offset } => Arc::new(LinearObjective { slope: vector(slope), offset: *offset }),
        ObjectiveSpec::Sin { dim, amplitude, frequency } => {
            Arc::new(SinObjective { dim: *dim, amplitude: *amplitude, frequency: *frequency })
        }
        ObjectiveSpec::Entropy { weights, slope } => {
            if weights.len() != slope.len() {
                return Err(CliError::Config("entropy weights and slope differ in length".into()));
            }
            Arc::new(EntropyObjective { weights: vector(weights), slope: vector(slope) })
        }
        ObjectiveSpec::SumExp { dim, ridge } => Arc::new(SumExp { dim: *dim, ridge: *ridge }),
        ObjectiveSpec::LogSumExp { dim, ridge } => Arc::new(LogSumExp { dim: *dim, ridge: *ridge }),
        ObjectiveSpec::Sum { terms } => {
            Arc::new(SumObjective::new(terms.iter().map(objective).collect::<Result<Vec<_>>>()?)?)
        }
        ObjectiveSpec::Scaled { inner, scale } => Arc::new(ScaledObjective { inner: objective(inner)?, scale: *scale }),
    })
}
