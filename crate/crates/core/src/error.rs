use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("vector has {0} coordinates, need at least 2")]
    DimensionTooSmall(usize),
    #[error("non-finite coordinate in vector")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bit count mismatch: {0} vs {1}")]
    BitCountMismatch(u32, u32),
    #[error("invalid bit count {0}: must be in 1..=30")]
    InvalidBitCount(u32),
    #[error("address {bits:#x} does not fit in {t} bits")]
    AddressOutOfRange { bits: u32, t: u32 },
    #[error("invalid angle range [{lo}, {hi}]")]
    InvalidAngleRange { lo: f64, hi: f64 },
    #[error("angle {0} is outside [0, pi]")]
    InvalidAngle(f64),
    #[error("hamming distance {distance} exceeds bit count {t}")]
    DistanceOutOfRange { distance: u32, t: u32 },
    #[error("invalid hamming set: {0}")]
    InvalidHammingSet(String),
    #[error("angle triple is not realizable by three unit vectors")]
    NonRealizableAngles,
    #[error("no elements in the sampling support")]
    EmptySupport,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("labels ({labels}) and vectors ({vectors}) differ in length")]
    LabelCountMismatch { labels: usize, vectors: usize },
    #[error("truth set is empty")]
    EmptyTruthSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
