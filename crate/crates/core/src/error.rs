use thiserror::Error;

use crate::model::AgentId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance size must be at least 1")]
    EmptyInstance,

    #[error("swap rank k={k} outside [2, {n}]")]
    SwapRankOutOfRange { k: usize, n: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("index {index} out of range for size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("not a permutation: {0}")]
    InvalidPermutation(String),

    #[error("matching is not perfect: {0}")]
    PartialMatching(String),

    #[error("malformed query: {0}")]
    MalformedQuery(String),

    #[error("evolution needs lists of length at least 2")]
    NoEvolutionDomain,

    #[error("A-side lists can only be read for free under one-sided evolution")]
    ModeViolation,

    #[error("criticality context is at t={context} but event is at t={event}")]
    StaleContext { context: u64, event: u64 },

    #[error("duplicate list owner {0}")]
    DuplicateOwner(AgentId),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("slope fit needs at least 3 distinct sizes, got {0}")]
    TooFewSizes(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("replay diverged: {0}")]
    ReplayMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
