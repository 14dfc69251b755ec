use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} outside chart domain (needs margin {margin})")]
    OutOfDomain { point: Vec<f64>, margin: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(&'static str),
    #[error("singular matrix (det = {0:e})")]
    SingularMatrix(f64),
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("degenerate metric (det = {0:e})")]
    DegenerateMetric(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("transversality lost (det = {0:e})")]
    TransversalityLost(f64),
    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),
    #[error("affine metric is indefinite")]
    IndefiniteMetric,
    #[error("normalizing constant varies across samples (relative spread {0:e})")]
    NonConstantRescale(f64),
    #[error("transversal is not proportional to the position vector (residual {0:e})")]
    NotCentroaffine(f64),

    #[error("vector is not tangent to the quadric (residual {0:e})")]
    NotTangent(f64),
    #[error("degenerate frame (volume {0:e})")]
    DegenerateFrame(f64),
    #[error("point is not on the quadric (residual {0:e})")]
    NotOnQuadric(f64),

    #[error("shape operator is degenerate (det = {0:e})")]
    DegenerateShapeOperator(f64),
    #[error("differential is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),
    #[error("induced metric is degenerate (det = {0:e})")]
    DegenerateInducedMetric(f64),

    #[error("lift has vanishing second slot")]
    DegenerateLift,
    #[error("1-form is not closed (path residual {0:e})")]
    NotClosed(f64),
    #[error("lift is not horizontal (residual {0:e})")]
    NotHorizontal(f64),

    #[error("form is not positive definite")]
    NotPositive,
    #[error("input is not a hyperbolic affine sphere: {0}")]
    NotHyperbolicSphere(String),
    #[error("adapted frame is not unimodular (det = {0:e})")]
    FrameNotUnimodular(f64),
    #[error("matrix M is singular (det = {0:e})")]
    SingularM(f64),

    #[error("cone does not support this query: {0}")]
    UnsupportedCone(String),
    #[error("projective Cauchy test failed (ratio {0:.3})")]
    NoConvergence(f64),
    #[error("cone is not strictly convex")]
    NotStrictlyConvex,

    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("example `{name}` does not support n = {n}")]
    BadDimension { name: String, n: usize },

    #[error("output failed: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
