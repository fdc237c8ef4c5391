//! Action-graph games (AGGs): representation, exact expected utilities,
//! a polynomial-time approximation scheme for epsilon-Nash equilibria on
//! bounded-degree tree strategy graphs, brute-force oracles, and the gadget
//! reductions from graphical games and boolean circuits.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, instance
//! generation and the command-line front end live in the companion `agg`
//! crate.

#![no_std]

extern crate alloc;

pub mod config;
pub mod error;
pub mod expected_utility;
pub mod game;
pub mod oracle;
pub mod profile;
pub mod ptas;
pub mod reductions;
pub mod validate;

pub use config::{enumerate_configurations, ConfigSpace, Configuration};
pub use error::{Error, Result};
pub use expected_utility::{
    expected_utility, is_eps_nash, neighborhood_distribution, regret, type_symmetric_regret,
    ConfigurationDistribution, RegretReport,
};
pub use game::{ActionGraphGame, GameBuilder, Payoff, PlayerType, StrategyGraph, UtilityTable};
pub use profile::{expand_profile, MixedProfile, TypeSymmetricProfile};
pub use validate::{validate, ValidationReport};

/// Index of a strategy node in the strategy graph.
pub type StrategyId = usize;
/// Index of an agent; agents are numbered type by type.
pub type AgentId = usize;
