use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A projected point falls outside the 256x256 zoom-0 world tile.
    #[error("point outside the Mercator world tile: ({x}, {y})")]
    OutOfWorld { x: f64, y: f64 },

    #[error("parse error{}: {msg}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// HTTP 401/403 from the map service. Never retried.
    #[error("authorization or quota error (HTTP {status})")]
    Auth { status: u16 },

    #[error("transport error after {attempts} attempt(s){}: {msg}", status.map(|s| format!(" (last status {s})")).unwrap_or_default())]
    Transport {
        status: Option<u16>,
        attempts: u32,
        msg: String,
    },

    /// The service answered, but not with an image.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("dataset error: {0}")]
    Dataset(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
