use std::path::PathBuf;

use thiserror::Error;

use crate::interferometer::MeshParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller broke an operation's precondition (shape, length or range).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A readout matrix, config or state failed validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// The postselected pattern has zero probability.
    #[error("impossible postselection: pattern {pattern:?} never occurs")]
    ImpossiblePostselection { pattern: Vec<usize> },

    /// The output state is undefined because the success probability vanished.
    #[error("undefined output state: success probability is zero")]
    UndefinedOutputState,

    #[error(
        "bootstrap failed after {attempts} attempt(s): best fidelity {fidelity:.9}, success {success:.6}"
    )]
    BootstrapFailed {
        attempts: usize,
        fidelity: f64,
        success: f64,
        best: Box<MeshParams>,
    },

    #[error("malformed input file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
