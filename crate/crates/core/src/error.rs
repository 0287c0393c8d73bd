use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed scene data: {0}")]
    Parse(serde_json::Error),

    #[error("invalid {kind} {id}: {reason}")]
    Validation { kind: &'static str, id: u64, reason: String },

    #[error("trace snapshot {index}: {reason}")]
    Trace { index: usize, reason: String },

    #[error("{0}")]
    Domain(String),

    #[error("vehicle {id} not present at t = {timestamp}")]
    MissingVehicle { id: u64, timestamp: f64 },

    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("data rate {0} Mb/s is not in the sensitivity table")]
    UnknownDataRate(f64),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e)
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
