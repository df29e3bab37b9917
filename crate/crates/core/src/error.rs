use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input: bad descriptor, bad JSON, inconsistent dimensions.
    #[error("parse error: {0}")]
    Parse(String),
    /// An operation's precondition does not hold (e.g. `N = M` for a submodule predicate).
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("size cap exceeded: {what} has size {size}, cap is {cap}")]
    CapExceeded { what: String, size: usize, cap: usize },
    /// Operands belong to different rings or modules.
    #[error("mismatch: {0}")]
    Mismatch(String),
    /// A structural invariant that must hold by theory was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Mismatch(_) => 2,
            Error::Precondition(_) => 3,
            Error::CapExceeded { .. } => 4,
            Error::Invariant(_) => 1,
            Error::Io(_) => 5,
        }
    }

    pub(crate) fn cap(what: impl Into<String>, size: usize, cap: usize) -> Self {
        Error::CapExceeded {
            what: what.into(),
            size,
            cap,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
