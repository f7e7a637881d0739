//! Experiment runner for `witamp-core`: configs, pipeline runs, named
//! property checks and their reports.

pub mod checks;
pub mod config;
pub mod run;

use witamp_core::Error;

/// Why a command stopped, mapped onto the process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Failure {
    /// Some bound was not met.
    #[error("{0}")]
    Bounds(String),
    /// Bad config, arguments or input files.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    /// The simulation would exceed the qubit budget.
    #[error("{0}")]
    Capacity(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Bounds(_) => 1,
            Failure::Invalid(_) | Failure::Io(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { what, needed, budget } => {
                let hint = if what == "simulated qubits" {
                    format!("; rerun with --max-qubits {needed}")
                } else {
                    String::new()
                };
                Failure::Capacity(format!(
                    "capacity exceeded: {what} needs {needed}, budget is {budget}{hint}"
                ))
            }
            other => Failure::Invalid(other.to_string()),
        }
    }
}
