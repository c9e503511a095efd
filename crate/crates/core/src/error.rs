use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration file problem; always names the offending key.
    #[error("config error ({key}): {message}")]
    Config { key: String, message: String },

    /// Shapes of two operands do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Projection operator construction failed for a specific output row.
    #[error("projection build failed at row {row}: {message}")]
    Build { row: usize, message: String },

    /// An iterate of the solver became non-finite.
    #[error("solver diverged at outer iteration {iter}")]
    SolverDiverged { iter: usize },

    /// Analysis routine could not produce a result.
    #[error("analysis error: {0}")]
    Analysis(String),

    /// Conditioning tile exceeds the dense-materialization limit.
    #[error("analysis tile too large: {rows} rows x {cols} active columns (limit {limit})")]
    TileTooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    /// Malformed image file.
    #[error("image format error: {0}")]
    ImageFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
