use alloc::string::String;

use crate::{AgentId, StrategyId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid scope: {0}")]
    InvalidScope(String),
    #[error("agent {0} does not exist")]
    UnknownAgent(AgentId),
    #[error("strategy {strategy} is not allowed for agent {agent}")]
    StrategyNotAllowed { agent: AgentId, strategy: StrategyId },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{what} size {size} exceeds guard {limit}")]
    GuardExceeded { what: &'static str, size: u128, limit: u128 },
    #[error("strategy graph is not a tree: {0}")]
    NotATree(String),
    #[error("strategy graph degree {degree} exceeds 3")]
    DegreeTooLarge { degree: usize },
    #[error("{types} player types exceed the cap of {cap}")]
    TooManyTypes { types: usize, cap: usize },
    #[error("type region overlap {overlap} exceeds the cap of {cap}")]
    OverlapExceeded { overlap: usize, cap: usize },
    #[error("strategy set of type {0} is not a connected region of the tree")]
    RegionDisconnected(usize),
    #[error("no feasible root entry: the probability grid is too coarse")]
    NoFeasibleRootEntry,
    #[error("solution regret {regret} exceeds epsilon {eps}")]
    VerificationFailed { regret: f64, eps: f64 },
    #[error("support size {support} exceeds 1/delta = {units}")]
    SupportTooLarge { support: usize, units: u32 },
    #[error("invalid reduction input: {0}")]
    InvalidReduction(String),
}
