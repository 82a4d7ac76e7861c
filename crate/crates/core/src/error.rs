use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input. `path` is a JSON pointer when the
    /// input came from a file, otherwise a short description of the argument.
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },

    /// An operator applied outside its domain, such as dropping the last
    /// coordinate of the arity-0 predicate.
    #[error("undefined operation: {0}")]
    UndefinedOperation(String),

    #[error("capacity exceeded: {what} exceeds the cap of {cap}")]
    Capacity { what: String, cap: u64 },

    /// The requested algorithm does not apply to the given input.
    #[error("mode error: {0}")]
    Mode(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn capacity(what: impl Into<String>, cap: u64) -> Self {
        Error::Capacity {
            what: what.into(),
            cap,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
