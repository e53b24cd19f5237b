use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("mode indices must be distinct (got {0} twice)")]
    DuplicateMode(usize),
    #[error("{name} = {value} is outside its legal range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("unphysical state: {0}")]
    Unphysical(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear form has no nonzero coefficient")]
    ZeroForm,
    #[error("steering set is empty")]
    EmptySet,
    #[error("steering set contains the steered mode {0}")]
    SteeredInSet(usize),
    #[error("mode sets overlap at mode {0}")]
    OverlappingSets(usize),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid network spec at {path}: {msg}")]
    InvalidSpec { path: String, msg: String },
    #[error("covariance is not positive definite; cannot factorize")]
    NotPositiveDefinite,
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a state that violates the uncertainty bound.
    pub fn is_unphysical(&self) -> bool {
        matches!(self, Error::Unphysical(_))
    }
}
