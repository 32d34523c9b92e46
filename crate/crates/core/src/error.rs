use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no usable cell in the data")]
    EmptyData,
    #[error("contrast is non-finite over the whole parameter box")]
    NonFinite,
    #[error("efficient weights are infinite on every cell")]
    DegenerateWeights,
    #[error("matrix is numerically singular (condition number {condition:.3e})")]
    Singular { condition: f64 },
    #[error("only {converged} of {requested} replicate fits converged")]
    TooFewReplicates { converged: usize, requested: usize },
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used in CLI messages and JSON diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::EmptyData => "EmptyData",
            Error::NonFinite => "NonFinite",
            Error::DegenerateWeights => "DegenerateWeights",
            Error::Singular { .. } => "Singular",
            Error::TooFewReplicates { .. } => "TooFewReplicates",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
