use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid preference for agent {agent}: {reason}")]
    InvalidPreference { agent: String, reason: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid generator config: {0}")]
    InvalidConfig(String),

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("preference of agent {agent} is not trichotomous: endowed object {object} sits in class {class}")]
    NotTrichotomous {
        agent: String,
        object: String,
        class: usize,
    },

    #[error("bundles must have equal size (got {left} and {right})")]
    CardinalityMismatch { left: usize, right: usize },

    #[error("constraint set is empty")]
    Infeasible,

    #[error("instance has {objects} objects, enumeration bound is {bound}")]
    TooLarge { objects: usize, bound: usize },

    #[error("matching is not component-wise individually rational")]
    NotComponentwiseIr,

    #[error("{0}")]
    ModeScope(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
