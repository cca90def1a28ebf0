use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("cannot read {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("unsupported class: {0}")]
    Unsupported(String),
    #[error("point is not in the set")]
    NotInSet,
    #[error("point is not in the graph")]
    NotInGraph,
    #[error("empty window")]
    EmptyWindow,
    #[error("value is not rational: {0}")]
    Irrational(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

pub(crate) fn dim_mismatch(what: &str, expected: usize, got: usize) -> CoreError {
    CoreError::Malformed(format!("{what}: expected dimension {expected}, got {got}"))
}
