use alloc::string::String;

/// Errors raised by the analytics core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("invalid cascade tree: {0}")]
    InvalidTree(String),
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("domain map line {line}: {reason}")]
    DomainMap { line: usize, reason: String },
    #[error("invalid topic model configuration: {0}")]
    TopicConfig(String),
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("feature combination is empty")]
    EmptyCombination,
    #[error("dataset needs both classes, found only {0}")]
    SingleClass(&'static str),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
