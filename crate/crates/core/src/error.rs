use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("half-edge {0} is not on an open boundary")]
    NotOnBoundary(u32),

    #[error("attach-back distance {k} out of range for boundary parameter {m}")]
    DistanceOutOfRange { k: usize, m: usize },

    #[error("filler boundary has {filler} edges but the hole has {hole}")]
    BoundaryMismatch { hole: usize, filler: usize },

    #[error("step budget of {budget} exhausted")]
    StepBudgetExceeded { budget: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
