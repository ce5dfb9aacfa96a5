use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("dimension mismatch: expected m = {expected}, got m = {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("vector is not of unit length (norm {norm})")]
    NonUnitVector { norm: f64 },
    #[error("enumeration exceeded the configured bound of {bound} entries")]
    EnumerationBound { bound: usize },
    #[error("basis cut {basis_cut} too small: {reason}")]
    BasisTooSmall { basis_cut: usize, reason: String },
    #[error("matrix is not symplectic (defect {defect:e})")]
    NonSymplectic { defect: f64 },
    #[error("degenerate spectrum: {reason}")]
    DegenerateSpectrum { reason: String },
    #[error("iterate {ell} is degenerate")]
    DegenerateIterate { ell: i64 },
    #[error("trajectory left the chart at theta = {theta}")]
    ChartExit { theta: f64 },
    #[error("step control failed to converge after {halvings} halvings")]
    StepControl { halvings: usize },
    #[error("truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },
    #[error("singular linear solve at weight {weight}")]
    SingularSolve { weight: usize },
    #[error("homological equation unsolvable at weight {weight}: {detail}")]
    ResonantObstruction { weight: usize, detail: String },
    #[error("resonant model: {relation}")]
    ResonantModel { relation: String },
    #[error("insufficient spectral coverage (tail estimate {tail:e})")]
    InsufficientCoverage { tail: f64 },
    #[error("orbit list does not cover the window support up to length {length}")]
    MissingOrbitCoverage { length: f64 },
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NonUnitVector { .. } => "NonUnitVector",
            Error::EnumerationBound { .. } => "EnumerationBound",
            Error::BasisTooSmall { .. } => "BasisTooSmall",
            Error::NonSymplectic { .. } => "NonSymplectic",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::DegenerateIterate { .. } => "DegenerateIterate",
            Error::ChartExit { .. } => "ChartExit",
            Error::StepControl { .. } => "StepControl",
            Error::TruncationMismatch { .. } => "TruncationMismatch",
            Error::SingularSolve { .. } => "SingularSolve",
            Error::ResonantObstruction { .. } => "ResonantObstruction",
            Error::ResonantModel { .. } => "ResonantModel",
            Error::InsufficientCoverage { .. } => "InsufficientCoverage",
            Error::MissingOrbitCoverage { .. } => "MissingOrbitCoverage",
            Error::Quadrature { .. } => "Quadrature",
            Error::Eigensolver(_) => "Eigensolver",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
