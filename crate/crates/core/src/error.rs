use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error in `{field}`: {message}")]
    Format {
        field: &'static str,
        message: String,
    },

    /// History or pyramid state does not match the frame it is being updated with.
    #[error("state error: {0}")]
    State(String),

    #[error("sequencing error: {0}")]
    Sequencing(String),

    /// A pluggable component returned data that breaks its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unpaired frames (no matching timestamp): {}", format_offenders(.offenders))]
    Pairing { offenders: Vec<f64> },

    #[error("window does not contain the display rectangle: {0}")]
    WindowInvariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("png encoding failed: {0}")]
    Png(#[from] image::ImageError),
}

fn format_offenders(ts: &[f64]) -> String {
    ts.iter()
        .map(|t| format!("{t:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
