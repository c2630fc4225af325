use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {0:?} lies inside the excluded unit ball of the chart")]
    ChartViolation([f64; 3]),
    #[error("quadrature under-resolved: refinement changed the integral by {change:.3e}")]
    QuadratureUnderResolved { change: f64 },
    #[error("invalid metric model: {0}")]
    InvalidModel(String),
    #[error("radial function non-positive at node {node} (r = {r})")]
    NonPositiveRadius { node: usize, r: f64 },
    #[error("graph condition violated at node {node}: g(nu, u) = {value}")]
    GraphConditionViolated { node: usize, value: f64 },
    #[error("inner sphere of radius {inner} is not enclosed (r_min = {r_min})")]
    InnerSphereNotEnclosed { inner: f64, r_min: f64 },
    #[error("unsupported Sobolev order {0}")]
    UnsupportedOrder(usize),
    #[error("curvature hypothesis violated: |A| r_min = {0:.3}")]
    CurvatureHypothesisViolated(f64),
    #[error("basis degree {requested} exceeds surface degree {available}")]
    BasisTooLarge { requested: usize, available: usize },
    #[error("eigensolver failure: {0}")]
    EigensolverFailure(String),
    #[error("volume correction failed to converge (residual {0:.3e})")]
    VolumeSolveFailure(f64),
    #[error("insufficient history: need {needed} diagnosed rows, have {have}")]
    InsufficientHistory { needed: usize, have: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("surfaces cannot be co-graphed: {0}")]
    CommonGraphFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
