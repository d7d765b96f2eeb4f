use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The opaque conductance is not smaller than the surface-to-mass
    /// conductance, so the transmission split has no positive solution.
    #[error("degenerate 5R1C network: H_op = {h_op:.3} W/K must be below H_mas = {h_mas:.3} W/K")]
    DegenerateNetwork { h_op: f64, h_mas: f64 },

    #[error("non-finite value in `{0}`")]
    Numeric(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("{path}: row {row}: {message}")]
    Ingestion {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("malformed frame at byte {offset}: {message}")]
    Decode { offset: usize, message: String },

    #[error("remote simulator: {0}")]
    Remote(String),

    #[error("timed out after {0:?}")]
    Timeout(std::time::Duration),

    /// A simulator failed during a co-simulation run.
    #[error("step {step} (t = {time} s), simulator `{simulator}`: {source}")]
    Step {
        step: usize,
        time: f64,
        simulator: String,
        #[source]
        source: Box<Error>,
    },

    #[error("report error: {0}")]
    Report(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
