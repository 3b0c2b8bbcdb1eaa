use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsovalError {
    #[error("dimension {0} not supported; need n >= 3")]
    Dimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is only implemented for n = 3")]
    ThreeDimensionalOnly(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("support value must be positive, got {0}")]
    NonPositiveSupport(f64),
    #[error("measure must have positive total mass")]
    ZeroMass,
    #[error("measure mass {got} does not satisfy the required normalisation {expected}")]
    Normalization { expected: f64, got: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl IsovalError {
    /// True for errors caused by malformed input rather than numerics.
    pub fn is_spec_error(&self) -> bool {
        matches!(
            self,
            Self::Dimension(_)
                | Self::DimensionMismatch { .. }
                | Self::ThreeDimensionalOnly(_)
                | Self::ZeroMass
                | Self::Normalization { .. }
                | Self::InvalidParameter(_)
                | Self::Parse(_)
                | Self::Io(_)
                | Self::Json(_)
                | Self::OriginNotInterior
                | Self::Degenerate(_)
        )
    }
}

pub type Result<T, E = IsovalError> = std::result::Result<T, E>;
