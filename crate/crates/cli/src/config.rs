//! Experiment configuration. TOML is the primary encoding; JSON with the
//! same structure is accepted.

use std::path::Path;

use gencost::par::Execution;
use gencost::solvers::ConvexSet;
use gencost::transforms::SearchConfig;
use gencost::verify::{CertificateKind, ConvexityMode, CurvatureExpectation, FivePointForm};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
}

/// Sampling and inner-search settings. The seed always comes from the
/// experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpec {
    pub restarts: usize,
    pub inner_restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub bounds: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_bounds: Option<Vec<(f64, f64)>>,
    pub ceiling: f64,
    pub execution: Execution,
}

impl Default for SearchSpec {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            restarts: d.restarts,
            inner_restarts: d.inner_restarts,
            max_iter: d.max_iter,
            tol: d.tol,
            bounds: d.bounds,
            dual_bounds: d.dual_bounds,
            ceiling: d.ceiling,
            execution: d.execution,
        }
    }
}

impl SearchSpec {
    pub fn to_config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            inner_restarts: self.inner_restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            bounds: self.bounds.clone(),
            dual_bounds: self.dual_bounds.clone(),
            seed,
            ceiling: self.ceiling,
            execution: self.execution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Quadratic {
        dim: usize,
        l: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<Vec<f64>>,
    },
    NegativeEntropy { dim: usize },
    LogSumExp { dim: usize, #[serde(default)] ridge: f64 },
    SumExp { dim: usize, #[serde(default)] ridge: f64 },
    /// A convex objective used as a potential.
    Objective { objective: Box<ObjectiveSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity { dim: usize },
    Affine { m: Vec<Vec<f64>>, b: Vec<f64> },
    Exp { dim: usize },
    Sinh { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Quadratic { dim: usize, l: f64 },
    Bregman { potential: PotentialSpec },
    ReverseBregman { potential: PotentialSpec },
    FenchelYoung { potential: PotentialSpec },
    LogDivergence { potential: PotentialSpec, alpha: f64 },
    ExponentialKernel { k: Vec<Vec<f64>>, eps: f64 },
    Sphere { dim: usize, l: f64 },
    MappedQuadratic { a: MapSpec, b: MapSpec },
    TensorProduct { first: Box<CostSpec>, second: Box<CostSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `(x - anchor)^T a (x - anchor) / 2 + offset`.
    Quadratic {
        a: Vec<Vec<f64>>,
        anchor: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `mu |x|^2 / 2`.
    Isotropic { dim: usize, mu: f64 },
    Linear {
        slope: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    Sin { dim: usize, amplitude: f64, frequency: f64 },
    /// `sum w_i x_i log x_i + <slope, x>`.
    Entropy { weights: Vec<f64>, slope: Vec<f64> },
    SumExp { dim: usize, #[serde(default)] ridge: f64 },
    LogSumExp { dim: usize, #[serde(default)] ridge: f64 },
    Sum { terms: Vec<ObjectiveSpec> },
    Scaled { inner: Box<ObjectiveSpec>, scale: f64 },
}

fn default_horizon() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(flatten)]
    pub method: Method,
}

/// Solver and its parameters. Solvers that need an objective or a cost take
/// them from the experiment's `objective` and `cost` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Alternating minimization of `c + f^c + g + h`; `f^c` is present when
    /// the experiment has an objective.
    AlternatingMin {
        x0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<ObjectiveSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<ObjectiveSpec>,
    },
    GdgcExplicit { x0: Vec<f64> },
    GdgcSurrogate { x0: Vec<f64> },
    ForwardBackward {
        x0: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<ObjectiveSpec>,
    },
    GradientDescent { x0: Vec<f64>, l: f64 },
    MirrorDescent { x0: Vec<f64>, potential: PotentialSpec },
    NaturalGradient { x0: Vec<f64>, potential: PotentialSpec },
    Newton { x0: Vec<f64> },
    RiemannianSphere { x0: Vec<f64>, l: f64 },
    LogDivergenceGd { x0: Vec<f64>, potential: PotentialSpec, alpha: f64 },
    /// Either an explicit cost matrix `b` or a random one of shape `size`
    /// drawn from the experiment seed; marginals default to random.
    Sinkhorn {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size: Option<(usize, usize)>,
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<Vec<f64>>,
    },
    Pocs { x0: Vec<f64>, first: ConvexSet, second: ConvexSet },
    LatentEm { k: Vec<Vec<f64>>, mu: Vec<f64>, theta0: Vec<f64> },
}

fn default_samples() -> usize {
    gencost::verify::DEFAULT_SAMPLES
}

fn default_five_point_samples() -> usize {
    gencost::verify::DEFAULT_FIVE_POINT_SAMPLES
}

fn default_descent_tol() -> f64 {
    1e-12
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A declared check. `expect_violation` inverts the verdict for checks
/// meant to exhibit a counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    #[serde(default, skip_serializing_if = "is_false")]
    pub expect_violation: bool,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Check {
    /// Rate bound against a reference point. Sinkhorn uses its converged
    /// coupling and Newton needs `f_star`.
    RateCertificate {
        kind: CertificateKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<Vec<f64>>,
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_star: Option<f64>,
    },
    Descent {
        #[serde(default = "default_descent_tol")]
        tol: f64,
    },
    DescentGap {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_star: Option<f64>,
    },
    FivePoint {
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        form: FivePointForm,
        #[serde(default = "default_five_point_samples")]
        samples: usize,
    },
    CConcavity {
        #[serde(default = "default_samples")]
        samples: usize,
    },
    CrossConvexity {
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        mode: ConvexityMode,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Cross-concavity of `-g` for the forward-backward `g`.
    CrossConcavity {
        #[serde(default)]
        lambda: f64,
        #[serde(default)]
        mode: ConvexityMode,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Lyapunov { x: Vec<f64>, y: Vec<f64> },
    Envelope { points: Vec<Vec<f64>>, tol: f64 },
    CrossCurvature {
        expect: CurvatureExpectation,
        tol: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        /// Largest angle between sampled points for the sphere cost.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_angle: Option<f64>,
    },
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::RateCertificate { .. } => "rate_certificate",
            Check::Descent { .. } => "descent",
            Check::DescentGap { .. } => "descent_gap",
            Check::FivePoint { .. } => "five_point",
            Check::CConcavity { .. } => "c_concavity",
            Check::CrossConvexity { .. } => "cross_convexity",
            Check::CrossConcavity { .. } => "cross_concavity",
            Check::Lyapunov { .. } => "lyapunov",
            Check::Envelope { .. } => "envelope",
            Check::CrossCurvature { .. } => "cross_curvature",
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid experiment name {:?}", self.name));
        }
        if let Some(s) = &self.solver {
            if s.horizon < 1 {
                return bad("horizon must be at least 1".into());
            }
        }
        if self.solver.is_none() && self.checks.is_empty() {
            return bad("experiment declares neither a solver nor checks".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad("seed must be below 2^63".into());
        }
        if self.search.restarts < 1 || !(self.search.tol > 0.0) {
            return bad("search needs restarts >= 1 and tol > 0".into());
        }
        Ok(())
    }
}
