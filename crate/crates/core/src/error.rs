use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{value} is outside the domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("eigenvalues {eigenvalues:?} lie outside the domain {domain}")]
    SpectrumOutsideDomain { eigenvalues: Vec<f64>, domain: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bad interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },

    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),

    #[error("bad dimensions: {0}")]
    BadDimensions(String),

    #[error("map family is not unital (defect {defect:e})")]
    NotUnitalFamily { defect: f64 },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}
