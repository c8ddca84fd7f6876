use thiserror::Error;

/// Errors raised by the estimation, certification and bound routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("index {index} out of range for dataset of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("datasets differ in {0} points; at most one allowed")]
    HammingDistanceExceeded(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {d} too small for sparsity {s} (need d >= s + 1)")]
    DimensionTooSmall { d: usize, s: usize },
    #[error("unbounded domain: supply an explicit search box")]
    UnboundedDomain,
    #[error("regularity violation: basis regularity {regularity} must exceed smoothness {smoothness}")]
    RegularityViolation { regularity: f64, smoothness: f64 },
    #[error("evaluation point {0} outside (0, 1)")]
    PointOutOfRange(f64),
    #[error("level too deep: 2^{level} exceeds n = {n}")]
    LevelTooDeep { level: u32, n: usize },
    #[error("eta {0} outside the allowed interval")]
    EtaOutOfRange(f64),
    #[error("n = {n} exceeds exact-mode cap {cap}")]
    NTooLarge { n: usize, cap: usize },
    #[error("target parameter has no closed form for this distribution")]
    UnknownTarget,
    #[error("input must be a discrete distribution")]
    NonDiscreteInput,
    #[error("estimator carries no worst-case stability certificate")]
    UncertifiedBase,
    #[error("only one-dimensional estimators are supported here")]
    MultiDimUnsupported,
    #[error("need at least {needed} replicates, got {got}")]
    InsufficientReps { needed: usize, got: usize },
    #[error("all values must be strictly positive")]
    NonPositiveValues,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
