use thiserror::Error;

/// Errors raised by the optimization engine and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cell index {index} out of range for {num_cells} cells")]
    CellOutOfRange { index: usize, num_cells: usize },

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no feasible grid point (rate floor cannot be met)")]
    Infeasible,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
