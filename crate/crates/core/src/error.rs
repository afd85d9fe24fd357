use std::path::PathBuf;

/// Errors produced by the shrinkage library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of a formula (negative, non-finite, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Inversion was requested for a singular value at or below the noise bulk edge.
    #[error("singular value {sigma} is not above the bulk edge {edge}")]
    BelowBulkEdge { sigma: f64, edge: f64 },

    /// The caller combined arguments inconsistently (length or shape mismatch).
    #[error("usage error: {0}")]
    Usage(String),

    /// An experiment or model configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A retained singular value is zero, so a ratio q/σ is undefined.
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// A decomposition failed to converge.
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// A state that the math rules out; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was readable but its contents do not parse.
    #[error("{}: malformed input: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// True for failures reading or writing files, as opposed to bad parameters.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
