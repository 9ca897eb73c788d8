use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("functional is not S_N-invariant: {0}")]
    NotInvariant(String),

    #[error("probe operand is degenerate: {0}")]
    ProbeFailure(String),

    #[error("ill-conditioned computation: {0}")]
    IllConditioned(String),

    /// An identity check produced a residual beyond its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn limit(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) => 2,
            Error::NotInvariant(_) | Error::ProbeFailure(_) => 2,
            Error::ResourceLimit(_) => 3,
            Error::IllConditioned(_) | Error::Numerical(_) => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
