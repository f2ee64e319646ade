use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no nontrivial solution for Robin parameter c = {c} (need |c| < 1)")]
    NoSolution { c: f64 },

    #[error("Hamiltonian drift {drift:e} exceeds tolerance {tol:e}; reduce the step")]
    ToleranceNotMet { drift: f64, tol: f64 },

    #[error("matrix is not skew-symmetric (defect {defect:e})")]
    NotSkew { defect: f64 },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("domain too small: {nodes} nodes along axis {axis}, need at least 8")]
    DomainTooSmall { axis: usize, nodes: usize },

    #[error("invalid exponent p = {p} in dimension {dim}: {reason}")]
    InvalidExponent { p: f64, dim: usize, reason: String },

    #[error("wave function vanishes (L^p norm {norm:e})")]
    ZeroFunction { norm: f64 },

    #[error("no convergence after {iterations} iterations (best quotient {best}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        best: f64,
        residual: f64,
    },

    #[error("model constant {value} is not positive")]
    NotPositive { value: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("the complement of the localization set is empty on this grid")]
    EmptyComplement,

    #[error("invalid partition scales: {0}")]
    InvalidScales(String),

    #[error("no translation accepted after {samples} samples")]
    NoneAccepted { samples: usize },

    #[error("invalid width profile: {0}")]
    InvalidProfile(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

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
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
