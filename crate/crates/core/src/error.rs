use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported derivative order {0} (curves expose orders 1 and 2)")]
    UnsupportedDerivativeOrder(usize),
    #[error("degenerate tangent at t = {t}")]
    DegenerateTangent { t: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("index {index} outside {what}")]
    IndexOutOfRange { index: i64, what: &'static str },
    #[error("truncation bound {got} too small, need at least {needed}")]
    TruncationTooSmall { needed: usize, got: usize },
    #[error("consistency condition d > 2*alpha violated (d = {degree}, alpha = {alpha})")]
    ConsistencyViolation { degree: usize, alpha: f64 },
    #[error("quadrature tolerance unreachable: estimated error {estimate:e} > tol {tol:e}")]
    QuadratureTolerance { estimate: f64, tol: f64 },
    #[error("series does not converge: {0}")]
    Convergence(String),
    #[error("matrix is rank deficient: estimated rank {rank} of {cols} columns")]
    RankDeficient { rank: usize, cols: usize },
    #[error("discrete orthogonality defect {defect:e} exceeds solver tolerance {tol:e}")]
    OrthogonalityDefect { defect: f64, tol: f64 },
    #[error("norm tail bound {tail:e} is not below 1% of the computed norm {norm:e}")]
    NormTail { tail: f64, norm: f64 },
    #[error("reference error estimate {estimate:e} exceeds 1% of the smallest sweep error {smallest:e}")]
    InsufficientReference { estimate: f64, smallest: f64 },
    #[error("need at least 3 points above the error floor for a rate fit, got {0}")]
    TooFewPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
