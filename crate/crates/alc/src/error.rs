use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, AlcError>;

#[derive(Debug, thiserror::Error)]
pub enum AlcError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] alc_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("index file {}: {msg} (in {section})", path.display())]
    Format {
        path: PathBuf,
        section: String,
        msg: String,
    },
    #[error("index file {}: unsupported format version {found} (expected {expected})", path.display())]
    UnsupportedVersion { path: PathBuf, found: u32, expected: u32 },
    #[error("config {}: {source}", path.display())]
    Config { path: PathBuf, source: serde_json::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl AlcError {
    pub fn usage(msg: impl Into<String>) -> Self {
        AlcError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        AlcError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        use alc_core::Error as E;
        match self {
            AlcError::Usage(_) | AlcError::Config { .. } => 1,
            AlcError::Core(e) => match e {
                E::Invariant(_) => 3,
                E::InvalidConfig(_)
                | E::InvalidBitCount(_)
                | E::InvalidAngle(_)
                | E::InvalidAngleRange { .. }
                | E::InvalidHammingSet(_)
                | E::DistanceOutOfRange { .. } => 1,
                _ => 2,
            },
            _ => 2,
        }
    }
}
