use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Farthest-first needs at least `k` candidate points (`|S| >= k`).
    #[error("insufficient points: need at least {needed}, have {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error(
        "cover has {cover} points but k = {k}: farthest-first on a delta-cover needs |Q| >= k"
    )]
    CoverTooSmall { cover: usize, k: usize },

    #[error("instance too large for exact enumeration: {subsets} subsets exceeds cap {cap}")]
    InstanceTooLarge { subsets: u128, cap: u64 },

    #[error("subset was built for a different point set")]
    ParentMismatch,

    #[error("not a delta-cover: covering radius {achieved} exceeds delta {delta}")]
    NotACover { achieved: f32, delta: f32 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InsufficientPoints { .. } | Error::CoverTooSmall { .. } => "insufficient_points",
            Error::InstanceTooLarge { .. } => "instance_too_large",
            Error::ParentMismatch => "parent_mismatch",
            Error::NotACover { .. } => "not_a_cover",
            Error::NotFound(_) => "not_found",
            Error::Parse { .. } => "parse",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
