//! Mixed strategy profiles.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::ActionGraphGame;
use crate::AgentId;

/// Probability vectors must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-12;

fn check_vector(v: &[f64], expected_len: usize, what: &str) -> Result<()> {
    if v.len() != expected_len {
        return Err(Error::InvalidProfile(format!(
            "{what}: expected {expected_len} probabilities, got {}",
            v.len()
        )));
    }
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidProfile(format!("{what}: negative or non-finite probability")));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidProfile(format!("{what}: probabilities sum to {sum}")));
    }
    Ok(())
}

/// One probability vector per agent, aligned with that agent's allowed
/// strategies (ascending as listed by its type).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub vectors: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        MixedProfile { vectors }
    }

    /// Everyone plays the uniform distribution over their strategies.
    pub fn uniform(game: &ActionGraphGame) -> Self {
        let vectors = (0..game.agent_count())
            .map(|a| {
                let k = game.agent_strategies(a).len();
                alloc::vec![1.0 / k as f64; k]
            })
            .collect();
        MixedProfile { vectors }
    }

    /// Pure profile from one strategy id per agent.
    pub fn pure(game: &ActionGraphGame, choice: &[crate::StrategyId]) -> Result<Self> {
        if choice.len() != game.agent_count() {
            return Err(Error::InvalidProfile(format!(
                "expected {} choices, got {}",
                game.agent_count(),
                choice.len()
            )));
        }
        let vectors = choice
            .iter()
            .enumerate()
            .map(|(a, &s)| {
                let allowed = game.agent_strategies(a);
                let pos = allowed
                    .iter()
                    .position(|&x| x == s)
                    .ok_or(Error::StrategyNotAllowed { agent: a, strategy: s })?;
                let mut v = alloc::vec![0.0; allowed.len()];
                v[pos] = 1.0;
                Ok(v)
            })
            .collect::<Result<_>>()?;
        Ok(MixedProfile { vectors })
    }

    pub fn validate(&self, game: &ActionGraphGame) -> Result<()> {
        if self.vectors.len() != game.agent_count() {
            return Err(Error::InvalidProfile(format!(
                "expected {} agents, got {}",
                game.agent_count(),
                self.vectors.len()
            )));
        }
        for (a, v) in self.vectors.iter().enumerate() {
            check_vector(v, game.agent_strategies(a).len(), &format!("agent {a}"))?;
        }
        Ok(())
    }

    /// Probability that `agent` plays strategy `s` (0 when not allowed).
    pub fn prob(&self, game: &ActionGraphGame, agent: AgentId, s: crate::StrategyId) -> f64 {
        game.agent_strategies(agent)
            .iter()
            .position(|&x| x == s)
            .map_or(0.0, |i| self.vectors[agent][i])
    }

    /// Collapses to a type-symmetric profile when all agents of each type
    /// play identical vectors.
    pub fn collapse(&self, game: &ActionGraphGame) -> Result<TypeSymmetricProfile> {
        self.validate(game)?;
        let mut vectors = Vec::with_capacity(game.types().len());
        let mut agent = 0;
        for (j, t) in game.types().iter().enumerate() {
            let count = t.agent_count as usize;
            if count == 0 {
                return Err(Error::InvalidProfile(format!("type {j} has no agents")));
            }
            let first = &self.vectors[agent];
            if self.vectors[agent..agent + count].iter().any(|v| v != first) {
                return Err(Error::InvalidProfile(format!("agents of type {j} differ")));
            }
            vectors.push(first.clone());
            agent += count;
        }
        Ok(TypeSymmetricProfile { vectors })
    }
}

/// One probability vector per player type.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSymmetricProfile {
    pub vectors: Vec<Vec<f64>>,
}

impl TypeSymmetricProfile {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        TypeSymmetricProfile { vectors }
    }

    pub fn validate(&self, game: &ActionGraphGame) -> Result<()> {
        if self.vectors.len() != game.types().len() {
            return Err(Error::InvalidProfile(format!(
                "expected {} types, got {}",
                game.types().len(),
                self.vectors.len()
            )));
        }
        for (j, v) in self.vectors.iter().enumerate() {
            check_vector(v, game.types()[j].strategies.len(), &format!("type {j}"))?;
        }
        Ok(())
    }

    /// Probability that agents of type `j` play strategy `s` (0 when not allowed).
    pub fn prob(&self, game: &ActionGraphGame, j: usize, s: crate::StrategyId) -> f64 {
        game.types()[j].strategies.iter().position(|&x| x == s).map_or(0.0, |i| self.vectors[j][i])
    }
}

/// Gives every agent its type's vector.
pub fn expand_profile(tsp: &TypeSymmetricProfile, game: &ActionGraphGame) -> Result<MixedProfile> {
    tsp.validate(game)?;
    let vectors = (0..game.agent_count()).map(|a| tsp.vectors[game.agent_type(a)].clone()).collect();
    Ok(MixedProfile { vectors })
}
