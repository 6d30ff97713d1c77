use thiserror::Error;

/// Errors raised by costs, transforms, solvers and checkers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },
    #[error("shooting failed: {0}")]
    ShootingFailure(String),
    #[error("antipodal points have no unique geodesic")]
    Antipodal,
    #[error("convex conjugate unavailable: {0}")]
    ConjugateUnavailable(String),
    #[error("value exceeded the ceiling {0:e}; treated as unbounded")]
    Unbounded(f64),
    #[error("inner solve failed: {0}")]
    InnerSolveFailure(String),
    #[error("monotonicity violated at step {step}: {before} -> {after}")]
    MonotonicityViolation { step: usize, before: f64, after: f64 },
    #[error("singular or indefinite Hessian")]
    SingularHessian,
    #[error("no admissible root for the step-size equation")]
    NoRoot,
    #[error("zero marginal encountered")]
    ZeroMarginal,
    #[error("zero mass under the model for an observed outcome")]
    ZeroMass,
    #[error("certificate kind {kind} does not apply to solver {solver}")]
    KindMismatch { kind: String, solver: String },
    #[error("trace does not record the dual iterates required by this check")]
    MissingDualIterates,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} is not finite")))
    }
}
