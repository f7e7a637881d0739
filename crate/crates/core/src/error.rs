use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("validation failed: {check}: {detail}")]
    Validation { check: &'static str, detail: String },

    /// The requested simulation does not fit the configured budget.
    #[error("capacity exceeded: {what} needs {needed}, budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u64,
        budget: u64,
    },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn validation(check: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            check,
            detail: detail.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
