use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    /// A caller-supplied value violated an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The encoded image stream is malformed.
    #[error("decode error: {0}")]
    Decode(String),

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A serialized artifact (model, sidecar, manifest, feature table) is malformed.
    #[error("format error in `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("invalid state: {0}")]
    State(String),

    /// Inputs that could not be read, listed together.
    #[error("{} input image(s) unreadable: {}", failures.len(), join_failures(failures))]
    Inputs { failures: Vec<(PathBuf, String)> },
}

fn join_failures(f: &[(PathBuf, String)]) -> String {
    f.iter()
        .map(|(p, m)| format!("{} ({m})", p.display()))
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Decode(_) => "decode",
            Error::Unsupported(_) => "unsupported",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::State(_) => "state",
            Error::Inputs { .. } => "io",
        }
    }
}
