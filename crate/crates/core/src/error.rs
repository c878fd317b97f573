use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rank {rank} out of range for {size}-subsets of a universe of {universe}")]
    RankOutOfRange {
        rank: usize,
        size: usize,
        universe: usize,
    },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid demand: {0}")]
    InvalidDemand(String),

    #[error("label {label} out of range (universe {universe})")]
    LabelOutOfRange { label: usize, universe: usize },

    #[error("chosen index {t} is not in the V-set {v:?}")]
    ChoiceNotInV { t: usize, v: Vec<usize> },

    #[error("no index choice recorded for auxiliary demand {0:?}")]
    MissingChoice(Vec<usize>),

    #[error("key/auxiliary demand inconsistent with requested file: {0}")]
    Inconsistent(String),

    #[error("missing signal: {0}")]
    MissingSignal(String),

    #[error("enumeration too large: {0}")]
    ScaleGuard(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
