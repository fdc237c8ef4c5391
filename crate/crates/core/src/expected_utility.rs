//! Configuration distributions, expected utilities and regret.
//!
//! The per-agent path folds agents into a dense table over the lexicographic
//! configuration space one at a time: each agent either moves mass to the
//! slack (it plays outside the scope) or bumps one scope coordinate. The
//! grouped path handles a block of agents sharing one vector in a single
//! multinomial step and is used by the type-symmetric routines and the PTAS.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::float::FloatCore;

use crate::config::{rank, ConfigSpace, Configuration};
use crate::error::{Error, Result};
use crate::game::{ActionGraphGame, UtilityTable};
use crate::profile::{MixedProfile, TypeSymmetricProfile};
use crate::{AgentId, StrategyId};

/// Slack used by [`is_eps_nash`].
pub const NASH_SLACK: f64 = 1e-9;

/// Groups larger than this are folded agent by agent; the closed-form
/// multinomial loses accuracy once powers underflow.
const MULTINOMIAL_MAX_GROUP: u32 = 500;

/// Probability of each configuration over `scope`, stored densely by
/// lexicographic rank among vectors with sum at most `max_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationDistribution {
    scope: Vec<StrategyId>,
    max_total: u32,
    mass: Vec<f64>,
}

impl ConfigurationDistribution {
    pub fn scope(&self) -> &[StrategyId] {
        &self.scope
    }

    pub fn max_total(&self) -> u32 {
        self.max_total
    }

    /// Dense masses indexed by configuration rank.
    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_of(&self, counts: &[u32]) -> f64 {
        if counts.len() != self.scope.len() {
            return 0.0;
        }
        rank(counts, self.max_total).map_or(0.0, |r| self.mass[r])
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Configurations with nonzero mass, in lexicographic order.
    pub fn support(&self) -> Vec<(Configuration, f64)> {
        let space = ConfigSpace::new(self.scope.len(), self.max_total);
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0.0)
            .map(|(i, &m)| (Configuration { scope: self.scope.clone(), counts: space.get(i).to_vec() }, m))
            .collect()
    }
}

fn check_game(game: &ActionGraphGame) -> Result<()> {
    if game.agent_count() != game.n() as usize {
        return Err(Error::InvalidGame(format!(
            "types list {} agents but n = {}",
            game.agent_count(),
            game.n()
        )));
    }
    Ok(())
}

fn check_scope(game: &ActionGraphGame, scope: &[StrategyId]) -> Result<()> {
    for (i, &s) in scope.iter().enumerate() {
        if s >= game.strategy_count() {
            return Err(Error::InvalidScope(format!("unknown strategy {s}")));
        }
        if scope[..i].contains(&s) {
            return Err(Error::InvalidScope(format!("duplicate strategy {s}")));
        }
    }
    Ok(())
}

/// Splits an agent's vector into per-coordinate scope probabilities and the
/// slack probability (mass on strategies outside the scope).
fn project(game: &ActionGraphGame, agent: AgentId, v: &[f64], scope: &[StrategyId], out: &mut [f64]) -> f64 {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut slack = 0.0;
    for (&s, &p) in game.agent_strategies(agent).iter().zip(v) {
        match scope.iter().position(|&x| x == s) {
            Some(k) => out[k] += p,
            None => slack += p,
        }
    }
    slack
}

fn fold_agent(space: &ConfigSpace, cur: &[f64], next: &mut [f64], probs: &[f64], slack: f64) {
    next.iter_mut().for_each(|x| *x = 0.0);
    for (idx, &m) in cur.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        next[idx] += m * slack;
        for (k, &p) in probs.iter().enumerate() {
            if p != 0.0 {
                let to = space.successor(idx, k).expect("more agents than the configuration space holds");
                next[to] += m * p;
            }
        }
    }
}

fn distribution_in_order(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    scope: &[StrategyId],
    order: impl Iterator<Item = AgentId>,
) -> ConfigurationDistribution {
    let n = game.n();
    let space = ConfigSpace::new(scope.len(), n);
    let mut cur = vec![0.0; space.len()];
    let mut next = vec![0.0; space.len()];
    cur[0] = 1.0;
    let mut probs = vec![0.0; scope.len()];
    for agent in order {
        let slack = project(game, agent, &profile.vectors[agent], scope, &mut probs);
        fold_agent(&space, &cur, &mut next, &probs, slack);
        core::mem::swap(&mut cur, &mut next);
    }
    ConfigurationDistribution { scope: scope.to_vec(), max_total: n, mass: cur }
}

/// Distribution of the configuration over `scope` induced by every agent
/// except `excluded`, folding agents in ascending id order.
pub fn neighborhood_distribution(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    scope: &[StrategyId],
    excluded: Option<AgentId>,
) -> Result<ConfigurationDistribution> {
    check_game(game)?;
    check_scope(game, scope)?;
    profile.validate(game)?;
    if let Some(a) = excluded {
        if a >= game.agent_count() {
            return Err(Error::UnknownAgent(a));
        }
    }
    let order = (0..game.agent_count()).filter(|&a| Some(a) != excluded);
    Ok(distribution_in_order(game, profile, scope, order))
}

/// Same as [`neighborhood_distribution`] with an explicit agent order.
/// Every agent other than `excluded` must appear exactly once.
pub fn neighborhood_distribution_ordered(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    scope: &[StrategyId],
    order: &[AgentId],
) -> Result<ConfigurationDistribution> {
    check_game(game)?;
    check_scope(game, scope)?;
    profile.validate(game)?;
    let mut seen = vec![false; game.agent_count()];
    for &a in order {
        if a >= seen.len() {
            return Err(Error::UnknownAgent(a));
        }
        if core::mem::replace(&mut seen[a], true) {
            return Err(Error::InvalidProfile(format!("agent {a} listed twice")));
        }
    }
    Ok(distribution_in_order(game, profile, scope, order.iter().copied()))
}

fn lookup_expectation(table: &UtilityTable, space: &ConfigSpace, mass: &[f64], bump: Option<usize>) -> f64 {
    let mut total = 0.0;
    for (idx, &m) in mass.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let r = match bump {
            Some(k) => space.successor(idx, k).expect("deviator fits in the configuration space"),
            None => idx,
        };
        total += m * table.approx_rank(r);
    }
    total
}

fn check_table(game: &ActionGraphGame, s: StrategyId) -> Result<()> {
    let missing = game.utility_table(s).missing();
    if missing > 0 {
        return Err(Error::InvalidGame(format!("incomplete utility table for strategy {s}")));
    }
    Ok(())
}

fn allowed(game: &ActionGraphGame, agent: AgentId, s: StrategyId) -> Result<()> {
    if agent >= game.agent_count() {
        return Err(Error::UnknownAgent(agent));
    }
    if !game.agent_strategies(agent).contains(&s) {
        return Err(Error::StrategyNotAllowed { agent, strategy: s });
    }
    Ok(())
}

/// Expected payoff of `agent` playing `strategy` while everyone else follows
/// `profile`. The deviator counts toward its own strategy only when the
/// strategy is its own neighbor.
pub fn expected_utility(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    agent: AgentId,
    strategy: StrategyId,
) -> Result<f64> {
    allowed(game, agent, strategy)?;
    check_table(game, strategy)?;
    let scope = game.neighbors(strategy);
    let dist = neighborhood_distribution(game, profile, scope, Some(agent))?;
    let space = ConfigSpace::new(scope.len(), game.n());
    let bump = scope.binary_search(&strategy).ok();
    Ok(lookup_expectation(game.utility_table(strategy), &space, &dist.mass, bump))
}

/// Reusable buffers for distributions built from blocks of agents that share
/// one probability vector.
#[derive(Debug, Clone)]
pub struct GroupedEvaluator {
    space: ConfigSpace,
    acc: Vec<f64>,
    tmp: Vec<f64>,
    group: Vec<f64>,
    /// Powers of each probability and of the slack, one row per coordinate.
    powers: Vec<f64>,
    coefficients: Vec<(u32, Vec<f64>)>,
    point_mass: bool,
}

impl GroupedEvaluator {
    /// Evaluator over `m` scope coordinates with at most `n` agents in total.
    pub fn new(m: usize, n: u32) -> Self {
        let space = ConfigSpace::new(m, n);
        let len = space.len();
        let mut acc = vec![0.0; len];
        acc[0] = 1.0;
        GroupedEvaluator {
            acc,
            tmp: vec![0.0; len],
            group: vec![0.0; len],
            powers: vec![0.0; (m + 1) * (n as usize + 1)],
            coefficients: Vec::new(),
            point_mass: true,
            space,
        }
    }

    pub fn dims(&self) -> usize {
        self.space.dims()
    }

    /// Back to the empty product (all mass on the zero configuration).
    pub fn reset(&mut self) {
        self.acc.iter_mut().for_each(|x| *x = 0.0);
        self.acc[0] = 1.0;
        self.point_mass = true;
    }

    pub fn masses(&self) -> &[f64] {
        &self.acc
    }

    /// Folds one agent with scope probabilities `probs` and slack `slack`.
    pub fn add_agent(&mut self, probs: &[f64], slack: f64) {
        fold_agent(&self.space, &self.acc, &mut self.tmp, probs, slack);
        core::mem::swap(&mut self.acc, &mut self.tmp);
        self.point_mass = false;
    }

    /// Folds `count` agents that each play scope coordinate `k` with
    /// probability `probs[k]` and stay outside the scope with `slack`.
    pub fn add_group(&mut self, count: u32, probs: &[f64], slack: f64) {
        if count == 0 {
            return;
        }
        if count > MULTINOMIAL_MAX_GROUP {
            for _ in 0..count {
                self.add_agent(probs, slack);
            }
            return;
        }
        self.fill_multinomial(count, probs, slack);
        if self.point_mass {
            core::mem::swap(&mut self.acc, &mut self.group);
        } else {
            self.convolve();
        }
        self.point_mass = false;
    }

    /// Multinomial pmf of `count` agents, written densely into `group`.
    fn fill_multinomial(&mut self, count: u32, probs: &[f64], slack: f64) {
        let m = self.space.dims();
        let stride = count as usize + 1;
        for (k, &p) in probs.iter().chain(core::iter::once(&slack)).enumerate() {
            let row = &mut self.powers[k * stride..(k + 1) * stride];
            let mut x = 1.0;
            for r in row.iter_mut() {
                *r = x;
                x *= p;
            }
        }
        let at = self.coefficient_row(count);
        let coef = &self.coefficients[at].1;
        for (idx, g) in self.group.iter_mut().enumerate() {
            let used = self.space.total(idx);
            if used > count {
                *g = 0.0;
                continue;
            }
            let mut p = coef[idx] * self.powers[m * stride + (count - used) as usize];
            for (k, &c) in self.space.get(idx).iter().enumerate() {
                p *= self.powers[k * stride + c as usize];
            }
            *g = p;
        }
    }

    /// Cached row of multinomial coefficients of `count` agents per configuration.
    fn coefficient_row(&mut self, count: u32) -> usize {
        match self.coefficients.iter().position(|(c, _)| *c == count) {
            Some(at) => at,
            None => {
                let space = &self.space;
                let coef = (0..space.len())
                    .map(|idx| if space.total(idx) > count { 0.0 } else { multinomial_coefficient(count, space.get(idx)) })
                    .collect();
                self.coefficients.push((count, coef));
                self.coefficients.len() - 1
            }
        }
    }

    fn convolve(&mut self) {
        let m = self.space.dims();
        self.tmp.iter_mut().for_each(|x| *x = 0.0);
        let mut sum = vec![0u32; m];
        for (i, &a) in self.acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let ci = self.space.get(i);
            for (j, &b) in self.group.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let cj = self.space.get(j);
                for k in 0..m {
                    sum[k] = ci[k] + cj[k];
                }
                let r = self.space.rank(&sum).expect("more agents than the configuration space holds");
                self.tmp[r] += a * b;
            }
        }
        core::mem::swap(&mut self.acc, &mut self.tmp);
    }

    /// Expected value of `table` under the current distribution. `bump`
    /// adds one agent on that scope coordinate before the lookup.
    pub fn expectation(&self, table: &UtilityTable, bump: Option<usize>) -> f64 {
        lookup_expectation(table, &self.space, &self.acc, bump)
    }
}

/// `count! / (x_0! .. x_{m-1}! (count - sum x)!)` as a product of binomials.
fn multinomial_coefficient(count: u32, xs: &[u32]) -> f64 {
    let mut left = count;
    let mut c = 1.0;
    for &x in xs {
        c *= binomial_f64(left, x);
        left -= x;
    }
    c
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    FloatCore::round(c)
}

/// Scope probabilities and slack for a type's vector.
fn project_type(game: &ActionGraphGame, j: usize, v: &[f64], scope: &[StrategyId], out: &mut [f64]) -> f64 {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut slack = 0.0;
    for (&s, &p) in game.types()[j].strategies.iter().zip(v) {
        match scope.binary_search(&s) {
            Ok(k) => out[k] += p,
            Err(_) => slack += p,
        }
    }
    slack
}

/// Distribution over `scope` (ascending) when every agent of type `j` plays
/// `tsp.vectors[j]`, with one agent of type `excluded_type` removed.
pub fn type_symmetric_distribution(
    game: &ActionGraphGame,
    tsp: &TypeSymmetricProfile,
    scope: &[StrategyId],
    excluded_type: Option<usize>,
) -> Result<ConfigurationDistribution> {
    check_game(game)?;
    check_scope(game, scope)?;
    if scope.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidScope("scope must be ascending".into()));
    }
    tsp.validate(game)?;
    let mut ev = GroupedEvaluator::new(scope.len(), game.n());
    fill_type_groups(game, tsp, scope, excluded_type, &mut ev);
    Ok(ConfigurationDistribution { scope: scope.to_vec(), max_total: game.n(), mass: ev.acc })
}

fn fill_type_groups(
    game: &ActionGraphGame,
    tsp: &TypeSymmetricProfile,
    scope: &[StrategyId],
    excluded_type: Option<usize>,
    ev: &mut GroupedEvaluator,
) {
    ev.reset();
    let mut probs = vec![0.0; scope.len()];
    for (j, t) in game.types().iter().enumerate() {
        let count = t.agent_count - u32::from(excluded_type == Some(j));
        let slack = project_type(game, j, &tsp.vectors[j], scope, &mut probs);
        ev.add_group(count, &probs, slack);
    }
}

/// Per-agent regrets of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    /// Best deviation payoff minus current expected payoff, per agent.
    pub per_agent: Vec<f64>,
    pub max: f64,
    /// Best deviation payoff minus the worst payoff on the agent's support.
    pub support_per_agent: Vec<f64>,
    pub max_support: f64,
}

fn summarize(eus: &[f64], v: &[f64]) -> (f64, f64) {
    let best = eus.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let current: f64 = eus.iter().zip(v).map(|(u, p)| u * p).sum();
    let worst_support =
        eus.iter().zip(v).filter(|(_, &p)| p > 0.0).map(|(&u, _)| u).fold(f64::INFINITY, f64::min);
    ((best - current).max(0.0), (best - worst_support).max(0.0))
}

fn report(per_agent: Vec<f64>, support_per_agent: Vec<f64>) -> RegretReport {
    let max = per_agent.iter().copied().fold(0.0, f64::max);
    let max_support = support_per_agent.iter().copied().fold(0.0, f64::max);
    RegretReport { per_agent, max, support_per_agent, max_support }
}

/// Regret of every agent under `profile`. Agents of one type playing the
/// same vector face the same opponents, so their payoffs are computed once.
pub fn regret(game: &ActionGraphGame, profile: &MixedProfile) -> Result<RegretReport> {
    check_game(game)?;
    profile.validate(game)?;
    for s in 0..game.strategy_count() {
        check_table(game, s)?;
    }
    let spaces: Vec<ConfigSpace> =
        (0..game.strategy_count()).map(|s| ConfigSpace::new(game.neighbors(s).len(), game.n())).collect();
    let mut cache: BTreeMap<(usize, Vec<u64>), Vec<f64>> = BTreeMap::new();
    let mut per_agent = Vec::with_capacity(game.agent_count());
    let mut support = Vec::with_capacity(game.agent_count());
    for agent in 0..game.agent_count() {
        let v = &profile.vectors[agent];
        let key = (game.agent_type(agent), v.iter().map(|p| p.to_bits()).collect::<Vec<_>>());
        let eus = cache.entry(key).or_insert_with(|| {
            game.agent_strategies(agent)
                .iter()
                .map(|&s| {
                    let scope = game.neighbors(s);
                    let order = (0..game.agent_count()).filter(|&a| a != agent);
                    let dist = distribution_in_order(game, profile, scope, order);
                    let bump = scope.binary_search(&s).ok();
                    lookup_expectation(game.utility_table(s), &spaces[s], &dist.mass, bump)
                })
                .collect()
        });
        let (r, sr) = summarize(eus, v);
        per_agent.push(r);
        support.push(sr);
    }
    Ok(report(per_agent, support))
}

/// Per-type regrets of a type-symmetric profile via the grouped path.
pub fn type_symmetric_regret(game: &ActionGraphGame, tsp: &TypeSymmetricProfile) -> Result<RegretReport> {
    check_game(game)?;
    tsp.validate(game)?;
    for s in 0..game.strategy_count() {
        check_table(game, s)?;
    }
    let mut evaluators: BTreeMap<usize, GroupedEvaluator> = BTreeMap::new();
    let mut per_type = Vec::with_capacity(game.types().len());
    let mut support = Vec::with_capacity(game.types().len());
    for (j, t) in game.types().iter().enumerate() {
        let eus: Vec<f64> = t
            .strategies
            .iter()
            .map(|&s| {
                let scope = game.neighbors(s);
                let ev = evaluators.entry(scope.len()).or_insert_with(|| GroupedEvaluator::new(scope.len(), game.n()));
                fill_type_groups(game, tsp, scope, Some(j), ev);
                ev.expectation(game.utility_table(s), scope.binary_search(&s).ok())
            })
            .collect();
        let (r, sr) = summarize(&eus, &tsp.vectors[j]);
        per_type.push(r);
        support.push(sr);
    }
    Ok(report(per_type, support))
}

/// True when no agent can gain more than `eps` (plus [`NASH_SLACK`]) by deviating.
pub fn is_eps_nash(game: &ActionGraphGame, profile: &MixedProfile, eps: f64) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon(eps));
    }
    Ok(regret(game, profile)?.max <= eps + NASH_SLACK)
}
