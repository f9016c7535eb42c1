use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate volume: {0}")]
    DegenerateVolume(String),

    #[error("unknown label {0} (valid range 0..=119)")]
    UnknownLabel(u32),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty scene: {0}")]
    EmptyScene(String),

    #[error("malformed {what} in {path}: {msg}")]
    Malformed {
        what: &'static str,
        path: PathBuf,
        msg: String,
    },

    #[error("size mismatch in {path}: expected {expected} bytes, found {found}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("bad scene file: {0}")]
    BadSceneFile(String),

    #[error("png: {0}")]
    Png(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for failures caused by file contents or the filesystem rather
    /// than by numerics or bad arguments.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Malformed { .. }
                | Error::SizeMismatch { .. }
                | Error::BadSceneFile(_)
                | Error::Png(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
