use thiserror::Error;

/// Errors raised by shape construction, quadrature and the audits.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidSpec(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("boundary sampling failed: {0}")]
    SamplingFailure(String),
    #[error("empty slice at height {0}")]
    EmptySlice(f64),
    #[error("point is not on the boundary: {0}")]
    NotOnBoundary(String),
    #[error("sets overlap: {0}")]
    Overlap(String),
    #[error("no height bin holds two or more points")]
    InsufficientPairs,
    #[error("containment predicate never fails along direction {0:?}")]
    DegenerateDirection([f64; 3]),
    #[error("moving-plane predicate is not monotone: {0}")]
    NonMonotonePredicate(String),
    #[error("contact angle is not constant (spread {0:e})")]
    NonConstantAngle(f64),
    #[error("shape does not touch the boundary hyperplane")]
    NoContactLine,
    #[error("unsupported perturbation family: {0}")]
    UnsupportedFamily(String),
    #[error("finite-difference step {0:e} below resolution floor")]
    StepTooSmall(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidTransform(_) => "InvalidTransform",
            Error::SamplingFailure(_) => "SamplingFailure",
            Error::EmptySlice(_) => "EmptySlice",
            Error::NotOnBoundary(_) => "NotOnBoundary",
            Error::Overlap(_) => "Overlap",
            Error::InsufficientPairs => "InsufficientPairs",
            Error::DegenerateDirection(_) => "DegenerateDirection",
            Error::NonMonotonePredicate(_) => "NonMonotonePredicate",
            Error::NonConstantAngle(_) => "NonConstantAngle",
            Error::NoContactLine => "NoContactLine",
            Error::UnsupportedFamily(_) => "UnsupportedFamily",
            Error::StepTooSmall(_) => "StepTooSmall",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
