use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event scheduled at t={at} but the clock is already at t={now}")]
    ScheduleInPast { at: f64, now: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("unknown built-in topology `{0}` (expected simplenet, nsfnet or nttnet)")]
    UnknownTopology(String),

    #[error("unknown routing algorithm `{0}` (expected antnet, ospf, spf, bf, qr, pqr or daemon)")]
    UnknownAlgorithm(String),

    #[error("invalid config: `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
