use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported domain spec: {0}")]
    UnsupportedSpec(String),
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("point lies outside the coordinate chart of the domain")]
    PointOutsideChart,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("defining function is not smooth (vanishing gradient) at the sample point")]
    NonSmoothPoint,
    #[error("point is not interior to the domain (r = {value:e})")]
    NotInterior { value: f64 },
    #[error("boundary projection did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("ambiguous boundary projection: distance {delta:e} exceeds tubular radius {radius:e}")]
    AmbiguousProjection { delta: f64, radius: f64 },
    #[error("strict pseudoconvexity not certified (minimum Levi eigenvalue {levi_min:e})")]
    NotPseudoconvex { levi_min: f64 },
    #[error("bordered determinant is not positive ({value:e}); Levi form degenerates")]
    NonPositiveDeterminant { value: f64 },
    #[error("root finding failed while tracing the boundary profile")]
    RootFindingFailure,
    #[error("quadrature did not converge (estimated error {estimate:e}, tolerance {tolerance:e})")]
    QuadratureNonconvergence { estimate: f64, tolerance: f64 },
    #[error("kernel series tail {tail:e} exceeds tolerance {tolerance:e}")]
    Divergence { tail: f64, tolerance: f64 },
    #[error("evaluation too close to the kernel pole (|1 - <z,w>| = {distance:e})")]
    PoleProximity { distance: f64 },
    #[error("determinant path winds; no continuous branch of det J^(n/(n+1))")]
    BranchAmbiguity,
    #[error("kernel is not positive at the evaluation point")]
    KernelNonpositive,
    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    IndefiniteMetric { min_eigenvalue: f64 },
    #[error("zero tangent vector")]
    ZeroVector,
    #[error("normal component of the gradient vanishes (|dr/dz_n| = {value:e})")]
    NormalComponentVanishes { value: f64 },
    #[error("tangential Levi block is degenerate (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateLeviBlock { min_eigenvalue: f64 },
    #[error("map has a pole at the evaluation point")]
    Pole,
    #[error("point left the chart of the scaling map")]
    ChartExit,
    #[error("kernel tail guard violated at delta = {delta:e} (tail {tail:e} > {limit:e}); {admissible} admissible samples")]
    GuardViolation {
        delta: f64,
        tail: f64,
        limit: f64,
        admissible: usize,
    },
    #[error("limit extrapolation needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
