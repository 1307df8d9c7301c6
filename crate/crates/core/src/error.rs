use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid step function: {0}")]
    InvalidFunction(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cut norm enumeration supports at most {max} groups, got {got}")]
    TooManyGroups { got: usize, max: usize },

    #[error("incompatible domains: {0}")]
    IncompatibleDomains(String),

    #[error("group {group} has no overlap with the sample grid")]
    EmptyGroup { group: usize },

    #[error("non-finite state first reached at t = {time}")]
    NonFinite { time: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{agents} agents are not conformable with the partition breakpoints")]
    NotConformable { agents: usize },
}
