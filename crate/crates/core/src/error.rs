use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Malformed bytes in a trace file.
    #[error("format error: {0}")]
    Format(String),

    /// A value violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Caller passed arguments outside an operation's preconditions.
    #[error("argument error: {0}")]
    Argument(String),

    /// A row of the affinity computation cannot be calibrated.
    #[error("degenerate row {row}: {reason}")]
    DegenerateRow { row: usize, reason: String },

    /// Per-layer failure, wrapping the underlying error.
    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::DegenerateRow { .. } => true,
            Error::Layer { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
