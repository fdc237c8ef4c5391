//! Brute-force ground truth: pure-profile enumeration, exhaustive expected
//! utility, grid search over type-symmetric profiles and the binomial
//! distance check. Every routine refuses inputs beyond its guard instead of
//! returning a partial answer.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::config::{config_count, next_config, unrank};
use crate::error::{Error, Result};
use crate::expected_utility::{type_symmetric_regret, NASH_SLACK};
use crate::game::{ActionGraphGame, Payoff};
use crate::profile::{MixedProfile, TypeSymmetricProfile};
use crate::{AgentId, StrategyId};

/// Default size guard shared by the oracles.
pub const DEFAULT_GUARD: u128 = 10_000_000;

fn guard(what: &'static str, size: u128, limit: u128) -> Result<()> {
    if size > limit {
        return Err(Error::GuardExceeded { what, size, limit });
    }
    Ok(())
}

/// Exhaustive version of [`crate::expected_utility`]: sums over every pure
/// profile of the other agents.
pub fn brute_force_expected_utility(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    agent: AgentId,
    strategy: StrategyId,
) -> Result<f64> {
    brute_force_expected_utility_with_guard(game, profile, agent, strategy, DEFAULT_GUARD)
}

pub fn brute_force_expected_utility_with_guard(
    game: &ActionGraphGame,
    profile: &MixedProfile,
    agent: AgentId,
    strategy: StrategyId,
    limit: u128,
) -> Result<f64> {
    profile.validate(game)?;
    if agent >= game.agent_count() {
        return Err(Error::UnknownAgent(agent));
    }
    if !game.agent_strategies(agent).contains(&strategy) {
        return Err(Error::StrategyNotAllowed { agent, strategy });
    }
    let others: Vec<AgentId> = (0..game.agent_count()).filter(|&a| a != agent).collect();
    let size = others
        .iter()
        .map(|&a| game.agent_strategies(a).len() as u128)
        .fold(1u128, u128::saturating_mul);
    guard("pure profiles of the other agents", size, limit)?;

    let scope = game.neighbors(strategy);
    let mut idx = vec![0usize; others.len()];
    let mut local = vec![0u32; scope.len()];
    let mut total = 0.0;
    loop {
        local.iter_mut().for_each(|c| *c = 0);
        let mut p = 1.0;
        for (o, &a) in others.iter().enumerate() {
            p *= profile.vectors[a][idx[o]];
            if let Ok(k) = scope.binary_search(&game.agent_strategies(a)[idx[o]]) {
                local[k] += 1;
            }
        }
        if let Ok(k) = scope.binary_search(&strategy) {
            local[k] += 1;
        }
        if p != 0.0 {
            let u = game
                .utility_f64(strategy, &local)
                .filter(|u| !u.is_nan())
                .ok_or_else(|| Error::InvalidGame(alloc::format!("incomplete utility table for strategy {strategy}")))?;
            total += p * u;
        }
        // Odometer over the others' strategy indices.
        let mut o = 0;
        loop {
            if o == others.len() {
                return Ok(total);
            }
            idx[o] += 1;
            if idx[o] < game.agent_strategies(others[o]).len() {
                break;
            }
            idx[o] = 0;
            o += 1;
        }
    }
}

fn local_counts(game: &ActionGraphGame, s: StrategyId, counts: &[u32], out: &mut Vec<u32>) {
    out.clear();
    out.extend(game.neighbors(s).iter().map(|&x| counts[x]));
}

fn exact_utility<'g>(game: &'g ActionGraphGame, s: StrategyId, local: &[u32]) -> Result<&'g Payoff> {
    game.utility(s, local)
        .ok_or_else(|| Error::InvalidGame(alloc::format!("incomplete utility table for strategy {s}")))
}

/// True when `agent` cannot strictly gain by a unilateral switch, given the
/// global strategy counts of a pure profile (which include the agent itself).
fn best_responds(
    game: &ActionGraphGame,
    agent: AgentId,
    choice: StrategyId,
    counts: &mut [u32],
    buf: &mut Vec<u32>,
) -> Result<bool> {
    local_counts(game, choice, counts, buf);
    let current = exact_utility(game, choice, buf)?.clone();
    counts[choice] -= 1;
    let mut ok = true;
    for &alt in game.agent_strategies(agent) {
        if alt == choice {
            continue;
        }
        counts[alt] += 1;
        local_counts(game, alt, counts, buf);
        let better = *exact_utility(game, alt, buf)? > current;
        counts[alt] -= 1;
        if better {
            ok = false;
            break;
        }
    }
    counts[choice] += 1;
    Ok(ok)
}

/// Exact check that a pure profile (one strategy per agent) has zero regret.
pub fn is_pure_nash(game: &ActionGraphGame, choice: &[StrategyId]) -> Result<bool> {
    MixedProfile::pure(game, choice)?;
    let mut counts = vec![0u32; game.strategy_count()];
    for &s in choice {
        counts[s] += 1;
    }
    let mut buf = Vec::new();
    for (a, &s) in choice.iter().enumerate() {
        if !best_responds(game, a, s, &mut counts, &mut buf)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All pure Nash equilibria, each as one strategy id per agent, in
/// lexicographic order.
pub fn enumerate_pure_nash(game: &ActionGraphGame) -> Result<Vec<Vec<StrategyId>>> {
    enumerate_pure_nash_with_guard(game, DEFAULT_GUARD)
}

/// Backtracking search in agent order. An agent's best-response condition is
/// tested as soon as every agent that can reach one of its neighborhoods has
/// been assigned, which prunes most of the product space on sparse games.
/// `limit` bounds the number of search nodes.
pub fn enumerate_pure_nash_with_guard(game: &ActionGraphGame, limit: u128) -> Result<Vec<Vec<StrategyId>>> {
    let agents = game.agent_count();
    if agents != game.n() as usize {
        return Err(Error::InvalidGame(alloc::format!("types list {agents} agents but n = {}", game.n())));
    }
    // Agents of one type share their dependencies, computed per type.
    let type_deps: Vec<Vec<bool>> = game
        .types()
        .iter()
        .map(|t| {
            let mut watched = vec![false; game.strategy_count()];
            for &s in &t.strategies {
                for &x in game.neighbors(s) {
                    watched[x] = true;
                }
            }
            game.types().iter().map(|u| u.strategies.iter().any(|&s| watched[s])).collect()
        })
        .collect();
    let mut check_at: Vec<Vec<AgentId>> = vec![Vec::new(); agents];
    for a in 0..agents {
        let deps = &type_deps[game.agent_type(a)];
        let last = (0..agents).rev().find(|&b| b == a || deps[game.agent_type(b)]).unwrap_or(a);
        check_at[last.max(a)].push(a);
    }

    let mut out = Vec::new();
    if agents == 0 {
        out.push(Vec::new());
        return Ok(out);
    }
    let mut choice = vec![0usize; agents];
    let mut pos = vec![0usize; agents];
    let mut counts = vec![0u32; game.strategy_count()];
    let mut buf = Vec::new();
    let mut nodes: u128 = 0;
    let mut depth = 0usize;
    // pos[depth] is the next strategy index to try for agent `depth`.
    loop {
        let options = game.agent_strategies(depth);
        if pos[depth] == options.len() {
            pos[depth] = 0;
            if depth == 0 {
                break;
            }
            depth -= 1;
            counts[choice[depth]] -= 1;
            continue;
        }
        nodes += 1;
        guard("pure profile search nodes", nodes, limit)?;
        let s = options[pos[depth]];
        pos[depth] += 1;
        choice[depth] = s;
        counts[s] += 1;
        let mut ok = true;
        for &a in &check_at[depth] {
            if !best_responds(game, a, choice[a], &mut counts, &mut buf)? {
                ok = false;
                break;
            }
        }
        if ok && depth + 1 == agents {
            out.push(choice.clone());
        }
        if ok && depth + 1 < agents {
            depth += 1;
        } else {
            counts[s] -= 1;
        }
    }
    Ok(out)
}

/// Grid resolution: `ceil(1/delta)` units, i.e. delta rounded down to `1/U`.
pub fn grid_units(delta: f64) -> Result<u32> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("delta must lie in (0, 1], got {delta}")));
    }
    let u = num_traits::float::FloatCore::ceil(1.0 / delta - 1e-9);
    if u > f64::from(u32::MAX) {
        return Err(Error::InvalidParameter(alloc::format!("delta {delta} is too small")));
    }
    Ok(u as u32)
}

/// Number of type-symmetric profiles with every probability a multiple of `1/units`.
pub fn grid_profile_count(game: &ActionGraphGame, units: u32) -> u128 {
    game.types()
        .iter()
        .map(|t| {
            let m = t.strategies.len();
            if m == 0 {
                0
            } else {
                config_count(m - 1, units).unwrap_or(u128::MAX)
            }
        })
        .fold(1u128, u128::saturating_mul)
}

/// Odometer over the grid: one composition of `units` per type, type 0
/// most significant; each composition is keyed by its tail.
struct GridCursor {
    units: u32,
    tails: Vec<Vec<u32>>,
}

impl GridCursor {
    fn at(game: &ActionGraphGame, units: u32, mut index: u128) -> Self {
        let sizes: Vec<u128> =
            game.types().iter().map(|t| config_count(t.strategies.len() - 1, units).unwrap_or(u128::MAX)).collect();
        let mut tails: Vec<Vec<u32>> = game.types().iter().map(|t| vec![0; t.strategies.len() - 1]).collect();
        for j in (0..tails.len()).rev() {
            let r = (index % sizes[j]) as usize;
            index /= sizes[j];
            unrank(r, units, &mut tails[j]);
        }
        GridCursor { units, tails }
    }

    fn advance(&mut self) {
        for tail in self.tails.iter_mut().rev() {
            if next_config(tail, self.units) {
                return;
            }
            tail.iter_mut().for_each(|c| *c = 0);
        }
    }

    fn profile(&self) -> TypeSymmetricProfile {
        let u = f64::from(self.units);
        let vectors = self
            .tails
            .iter()
            .map(|tail| {
                let head = self.units - tail.iter().sum::<u32>();
                core::iter::once(head).chain(tail.iter().copied()).map(|x| f64::from(x) / u).collect()
            })
            .collect();
        TypeSymmetricProfile::new(vectors)
    }
}

/// Every grid profile (resolution `delta`) whose regret is at most `eps`.
pub fn grid_search_type_symmetric(game: &ActionGraphGame, delta: f64, eps: f64) -> Result<Vec<TypeSymmetricProfile>> {
    grid_search_type_symmetric_with_guard(game, delta, eps, DEFAULT_GUARD)
}

pub fn grid_search_type_symmetric_with_guard(
    game: &ActionGraphGame,
    delta: f64,
    eps: f64,
    limit: u128,
) -> Result<Vec<TypeSymmetricProfile>> {
    let units = grid_units(delta)?;
    let total = grid_profile_count(game, units);
    guard("type-symmetric grid profiles", total, limit)?;
    grid_search_range(game, units, eps, 0..total)
}

/// Grid search restricted to profile indices in `range`; concatenating the
/// results over a partition of `0..grid_profile_count` gives the full search.
pub fn grid_search_range(
    game: &ActionGraphGame,
    units: u32,
    eps: f64,
    range: Range<u128>,
) -> Result<Vec<TypeSymmetricProfile>> {
    if !(eps >= 0.0) {
        return Err(Error::NegativeEpsilon(eps));
    }
    if units == 0 {
        return Err(Error::InvalidParameter("grid needs at least one unit".into()));
    }
    if game.types().iter().any(|t| t.strategies.is_empty()) {
        return Err(Error::InvalidGame("type without strategies".into()));
    }
    let total = grid_profile_count(game, units);
    let end = range.end.min(total);
    let mut out = Vec::new();
    if range.start >= end {
        return Ok(out);
    }
    let mut cursor = GridCursor::at(game, units, range.start);
    for i in range.start..end {
        let p = cursor.profile();
        if type_symmetric_regret(game, &p)?.max <= eps + NASH_SLACK {
            out.push(p);
        }
        if i + 1 < end {
            cursor.advance();
        }
    }
    Ok(out)
}

fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    pmf[0] = 1.0;
    for t in 0..n as usize {
        for k in (0..=t + 1).rev() {
            let stay = if k <= t { pmf[k] * (1.0 - p) } else { 0.0 };
            let up = if k > 0 { pmf[k - 1] * p } else { 0.0 };
            pmf[k] = stay + up;
        }
    }
    pmf
}

/// `max_k |Pr(B(n,p)=k) - Pr(B(n,p+delta)=k)|`.
pub fn binomial_tv_distance(n: u32, p: f64, delta: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    if !(p >= 0.0 && delta >= 0.0 && p + delta <= 1.0 + TOL) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need 0 <= p and p + delta <= 1, got p = {p}, delta = {delta}"
        )));
    }
    let q = (p + delta).min(1.0);
    let a = binomial_pmf(n, p);
    let b = binomial_pmf(n, q);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected_utility::expected_utility;
    use crate::game::{payoff, payoff_ratio, GameBuilder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pennies() -> ActionGraphGame {
        let mut b = GameBuilder::with_strategy_count(4);
        b.add_type(1, vec![0, 1]).add_type(1, vec![2, 3]);
        for (a, c) in [(2, 0), (3, 1), (0, 2), (1, 3)] {
            b.add_edge(a, c);
        }
        b.build(|s, _, c| match s {
            0 | 1 => payoff(i64::from(c[0] == 1)),
            _ => payoff(i64::from(c[0] == 0)),
        })
        .unwrap()
    }

    fn coordination() -> ActionGraphGame {
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(2, vec![0, 1]).add_edge(0, 0).add_edge(1, 1);
        b.build(|_, _, c| payoff(i64::from(c[0] == 2))).unwrap()
    }

    #[test]
    fn deterministic_profile_single_term() {
        let g = pennies();
        let p = MixedProfile::pure(&g, &[1, 3]).unwrap();
        assert_eq!(brute_force_expected_utility(&g, &p, 0, 1).unwrap(), 1.0);
        assert_eq!(brute_force_expected_utility(&g, &p, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn two_by_two_hand_checked() {
        let g = pennies();
        let p = MixedProfile::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]);
        // Matcher on heads wins when the other shows heads.
        assert!((brute_force_expected_utility(&g, &p, 0, 0).unwrap() - 0.6).abs() < 1e-15);
        assert!((brute_force_expected_utility(&g, &p, 1, 3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let mut b = GameBuilder::with_strategy_count(4);
            b.add_type(2, vec![0, 1, 2]).add_type(2, vec![1, 3]);
            for _ in 0..5 {
                b.add_edge(rng.gen_range(0..4), rng.gen_range(0..4));
            }
            let g = b.build(|_, _, _| payoff_ratio(rng.gen_range(0..50), 9)).unwrap();
            let p = MixedProfile::uniform(&g);
            for a in 0..4 {
                for &s in g.agent_strategies(a) {
                    let x = brute_force_expected_utility(&g, &p, a, s).unwrap();
                    let y = expected_utility(&g, &p, a, s).unwrap();
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn guard_is_hard_error() {
        let g = coordination();
        let p = MixedProfile::uniform(&g);
        assert!(matches!(
            brute_force_expected_utility_with_guard(&g, &p, 0, 0, 1),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(matches!(enumerate_pure_nash_with_guard(&g, 2), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn pennies_has_no_pure_nash() {
        assert!(enumerate_pure_nash(&pennies()).unwrap().is_empty());
    }

    #[test]
    fn coordination_has_the_matching_profiles() {
        let g = coordination();
        assert_eq!(enumerate_pure_nash(&g).unwrap(), vec![vec![0, 0], vec![1, 1]]);
    }

    /// Every pure profile, classified by the exact per-profile check.
    fn all_pure(game: &ActionGraphGame) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut idx = vec![0usize; game.agent_count()];
        loop {
            let choice: Vec<usize> = idx.iter().enumerate().map(|(a, &i)| game.agent_strategies(a)[i]).collect();
            if is_pure_nash(game, &choice).unwrap() {
                out.push(choice);
            }
            let mut a = game.agent_count();
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < game.agent_strategies(a).len() {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    #[test]
    fn backtracking_matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..60 {
            let mut b = GameBuilder::with_strategy_count(5);
            b.add_type(2, vec![0, 1]).add_type(1, vec![2, 3, 4]).add_type(1, vec![0, 4]);
            for _ in 0..6 {
                b.add_edge(rng.gen_range(0..5), rng.gen_range(0..5));
            }
            let g = b.build(|_, _, _| payoff(rng.gen_range(0..3))).unwrap();
            assert_eq!(enumerate_pure_nash(&g).unwrap(), all_pure(&g));
        }
    }

    #[test]
    fn single_strategy_grid() {
        let mut b = GameBuilder::with_strategy_count(1);
        b.add_type(2, vec![0]);
        let g = b.build(|_, _, _| payoff(1)).unwrap();
        let found = grid_search_type_symmetric(&g, 0.1, 0.0).unwrap();
        assert_eq!(found, vec![TypeSymmetricProfile::new(vec![vec![1.0]])]);
    }

    fn anti_coordination() -> ActionGraphGame {
        // Two agents; a strategy pays 1 when the other agent is elsewhere.
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(2, vec![0, 1]).add_edge(0, 0).add_edge(1, 1);
        b.build(|_, _, c| payoff(i64::from(c[0] == 1))).unwrap()
    }

    #[test]
    fn anti_coordination_has_half_half() {
        let found = grid_search_type_symmetric(&anti_coordination(), 0.1, 0.3).unwrap();
        assert!(found.iter().any(|p| (p.vectors[0][0] - 0.5).abs() < 1e-12));
        // Swapping the two strategies is an automorphism of this game.
        for p in &found {
            let swapped = TypeSymmetricProfile::new(vec![vec![p.vectors[0][1], p.vectors[0][0]]]);
            assert!(found.iter().any(|q| q.vectors.iter().zip(&swapped.vectors).all(|(a, b)| a
                .iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() < 1e-12))));
        }
    }

    #[test]
    fn grid_ranges_partition_the_search() {
        let g = pennies();
        let units = grid_units(0.1).unwrap();
        let all = grid_search_range(&g, units, 0.25, 0..u128::MAX).unwrap();
        let total = grid_profile_count(&g, units);
        assert_eq!(total, 121);
        let mut parts = Vec::new();
        for start in (0..total).step_by(17) {
            parts.extend(grid_search_range(&g, units, 0.25, start..start + 17).unwrap());
        }
        assert_eq!(all, parts);
        assert!(all.iter().any(|p| p.vectors[0][0] == 0.5 && p.vectors[1][0] == 0.5));
    }

    #[test]
    fn grid_guard() {
        assert!(matches!(
            grid_search_type_symmetric_with_guard(&pennies(), 0.1, 0.1, 100),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn tv_zero_delta() {
        assert_eq!(binomial_tv_distance(7, 0.3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tv_one_trial() {
        assert!((binomial_tv_distance(1, 0.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tv_range_errors() {
        assert!(binomial_tv_distance(3, -0.1, 0.1).is_err());
        assert!(binomial_tv_distance(3, 0.95, 0.1).is_err());
    }

    #[test]
    fn tv_bound_holds() {
        for n in 0..=30u32 {
            for i in 0..=20 {
                let p = f64::from(i) * 0.05;
                for delta in [0.05, 0.1] {
                    if p + delta <= 1.0 + 1e-12 {
                        let d = binomial_tv_distance(n, p, delta).unwrap();
                        assert!(d <= f64::from(n) * delta + 1e-12, "n={n} p={p} delta={delta}: {d}");
                    }
                }
            }
        }
    }
}
