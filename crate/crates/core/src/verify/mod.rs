//! Sampled checks of structural properties and per-iterate rate
//! certificates for solver traces.
//!
//! A passing property report is a sampled statement: it records how many
//! samples were drawn, from which seed, and the noise floor below which
//! deviations are ignored.

mod certificates;
mod properties;

use serde::{Deserialize, Serialize};

pub use certificates::{
    am_bound, check_descent, check_descent_gap, fb_bound, gdgc_bound, lyapunov_check, natural_gradient_bound, newton_bound,
    pocs_bound, rate_certificate, riemannian_bound, sinkhorn_bound, BoundSpec, CertificateKind, CertificateRow,
    RateCertificate,
};
pub use properties::{
    check_c_concavity, check_cross_concavity, check_cross_convexity, check_cross_curvature, check_five_point,
    check_sphere_cross_curvature, ConvexityMode, CurvatureExpectation, FivePointForm,
};

use crate::error::{Error, Result};
use crate::linalg::Point;

/// Default number of samples for pointwise property checks.
pub const DEFAULT_SAMPLES: usize = 200;
/// Default number of triples for the five-point check.
pub const DEFAULT_FIVE_POINT_SAMPLES: usize = 50;

/// A sample where the checked inequality `lhs <= rhs` failed by more than
/// the tolerance. `margin = lhs - rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sample: usize,
    pub witness: Vec<Vec<f64>>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub samples: usize,
    pub violations: Vec<Violation>,
    pub passed: bool,
    pub noise_floor: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl PropertyReport {
    pub(crate) fn new(property: impl Into<String>, samples: usize, seed: u64) -> Self {
        Self {
            property: property.into(),
            samples,
            violations: Vec::new(),
            passed: true,
            noise_floor: 0.0,
            seed,
            notes: Vec::new(),
        }
    }

    /// Records `lhs <= rhs` with absolute slack `tol`.
    pub(crate) fn record(&mut self, sample: usize, witness: &[&Point], lhs: f64, rhs: f64, tol: f64) {
        self.noise_floor = self.noise_floor.max(tol);
        if !(lhs <= rhs + tol) {
            self.violations.push(Violation {
                sample,
                witness: witness.iter().map(|p| p.as_slice().to_vec()).collect(),
                lhs,
                rhs,
                margin: lhs - rhs,
            });
            self.passed = false;
        }
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// `tol * max(1, |a|, |b|)`.
pub(crate) fn scaled(tol: f64, a: f64, b: f64) -> f64 {
    tol * a.abs().max(b.abs()).max(1.0)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("strength parameter must lie in [0, 1), got {lambda}")));
    }
    Ok(())
}
