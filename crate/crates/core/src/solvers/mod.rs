//! Iterative solvers. Every solver returns a [`SolverTrace`] holding the
//! iterates and the per-step quantities the certificate checks consume.

mod alternating;
mod classical;
mod discrete;
mod general_cost;
mod pocs;

use serde::{Deserialize, Serialize};

pub use alternating::alternating_minimize;
pub use classical::{
    gradient_descent, log_divergence_gd, log_divergence_step_size, mirror_descent, natural_gradient, newton,
    riemannian_sphere_gd,
};
pub use discrete::{kl_divergence, latent_em, sinkhorn, sinkhorn_limit, SinkhornRun};
pub use general_cost::{forward_backward, gdgc_explicit, gdgc_surrogate};
pub use pocs::{pocs, ConvexSet};

use crate::linalg::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    AlternatingMin,
    GdgcExplicit,
    GdgcSurrogate,
    ForwardBackward,
    GradientDescent,
    MirrorDescent,
    NaturalGradient,
    Newton,
    RiemannianSphere,
    LogDivergenceGd,
    Sinkhorn,
    Pocs,
    LatentEm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 13] = [
        SolverKind::AlternatingMin,
        SolverKind::GdgcExplicit,
        SolverKind::GdgcSurrogate,
        SolverKind::ForwardBackward,
        SolverKind::GradientDescent,
        SolverKind::MirrorDescent,
        SolverKind::NaturalGradient,
        SolverKind::Newton,
        SolverKind::RiemannianSphere,
        SolverKind::LogDivergenceGd,
        SolverKind::Sinkhorn,
        SolverKind::Pocs,
        SolverKind::LatentEm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::AlternatingMin => "alternating_min",
            SolverKind::GdgcExplicit => "gdgc_explicit",
            SolverKind::GdgcSurrogate => "gdgc_surrogate",
            SolverKind::ForwardBackward => "forward_backward",
            SolverKind::GradientDescent => "gradient_descent",
            SolverKind::MirrorDescent => "mirror_descent",
            SolverKind::NaturalGradient => "natural_gradient",
            SolverKind::Newton => "newton",
            SolverKind::RiemannianSphere => "riemannian_sphere",
            SolverKind::LogDivergenceGd => "log_divergence_gd",
            SolverKind::Sinkhorn => "sinkhorn",
            SolverKind::Pocs => "pocs",
            SolverKind::LatentEm => "latent_em",
        }
    }
}

/// Iteration limits shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub horizon: usize,
    /// Relative slack allowed in monotonicity assertions.
    pub monotone_tol: f64,
    pub backward_max_iter: usize,
    pub backward_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { horizon: 100, monotone_tol: 1e-9, backward_max_iter: 100, backward_tol: 1e-10 }
    }
}

impl SolverSpec {
    pub fn horizon(horizon: usize) -> Self {
        Self { horizon, ..Self::default() }
    }
}

/// One iterate. `objective` is the quantity the solver's rate bounds refer
/// to: `phi(x_n, y_n)` for alternating minimization, `f(x_n)` or
/// `f(x_n) + g(x_n)` for descent methods, `d_C(x_n)^2` for projections and
/// a KL divergence for the coupling solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub objective: f64,
    pub phi: Option<f64>,
    /// `phi(x_n, y_{n+1}) - phi(x_{n+1}, y_{n+1})`, or the cost-only
    /// version `c(x_n, y_{n+1}) - c(x_{n+1}, y_{n+1})` for descent methods.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub solver: SolverKind,
    pub label: String,
    pub records: Vec<TraceRecord>,
    /// Iterates in dual coordinates, recorded by solvers that have one.
    pub dual_view: Option<Vec<Vec<f64>>>,
}

impl SolverTrace {
    pub(crate) fn new(solver: SolverKind, label: impl Into<String>) -> Self {
        Self { solver, label: label.into(), records: Vec::new(), dual_view: None }
    }

    pub(crate) fn push(&mut self, x: &Point, y: Option<&Point>, objective: f64, phi: Option<f64>) {
        self.records.push(TraceRecord {
            n: self.records.len(),
            x: x.as_slice().to_vec(),
            y: y.map(|v| v.as_slice().to_vec()),
            objective,
            phi,
            gap: None,
        });
    }

    pub(crate) fn set_gap(&mut self, n: usize, gap: f64) {
        self.records[n].gap = Some(gap);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn x(&self, n: usize) -> Point {
        Point::from_vec(self.records[n].x.clone())
    }

    pub fn y(&self, n: usize) -> Option<Point> {
        self.records[n].y.clone().map(Point::from_vec)
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }
}
