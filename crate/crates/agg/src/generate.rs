//! Seeded random instances.

use agg_core::game::{payoff_ratio, GameBuilder};
use agg_core::{ActionGraphGame, Result, StrategyId};
use rand::seq::SliceRandom;
use rand::Rng;

/// Payoffs are drawn uniformly from `{0, 1/den, ..., 1}`.
const PAYOFF_DENOMINATOR: i64 = 20;

/// Parameters of a random game.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub agents: u32,
    pub strategies: usize,
    pub types: usize,
    /// Degree bound of the strategy graph: undirected degree for trees,
    /// in-neighborhood size for general graphs.
    pub degree: usize,
    /// Probability that a node gets a self-loop.
    pub self_loops: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { agents: 3, strategies: 4, types: 1, degree: 3, self_loops: 0.3 }
    }
}

fn check(p: &GenParams) -> Result<()> {
    let bad = |m: &str| Err(agg_core::Error::InvalidParameter(m.into()));
    if p.strategies == 0 {
        return bad("need at least one strategy");
    }
    if p.types == 0 || p.agents < p.types as u32 {
        return bad("need at least one agent per type and at least one type");
    }
    if p.degree == 0 {
        return bad("degree bound must be positive");
    }
    if !(0.0..=1.0).contains(&p.self_loops) {
        return bad("self-loop probability must lie in [0, 1]");
    }
    Ok(())
}

/// Splits `agents` into `types` positive parts.
fn split_agents(rng: &mut impl Rng, agents: u32, types: usize) -> Vec<u32> {
    let mut counts = vec![1u32; types];
    for _ in types as u32..agents {
        counts[rng.gen_range(0..types)] += 1;
    }
    counts
}

fn random_payoffs(rng: &mut impl Rng, b: &GameBuilder) -> Result<ActionGraphGame> {
    // Tables are filled in a fixed order, so the result depends only on the seed.
    b.build(|_, _, _| payoff_ratio(rng.gen_range(0..=PAYOFF_DENOMINATOR), PAYOFF_DENOMINATOR))
}

/// A random tree strategy graph with maximum undirected degree `degree`.
/// Each tree edge is oriented one way, the other way, or both; type 0 may
/// play every strategy and the other types play random connected subtrees.
pub fn random_tree_game(rng: &mut impl Rng, p: &GenParams) -> Result<ActionGraphGame> {
    check(p)?;
    let m = p.strategies;
    let mut adj: Vec<Vec<StrategyId>> = vec![Vec::new(); m];
    let mut b = GameBuilder::with_strategy_count(m);
    for v in 1..m {
        let open: Vec<StrategyId> = (0..v).filter(|&u| adj[u].len() < p.degree).collect();
        let Some(&u) = open.choose(rng) else {
            return Err(agg_core::Error::InvalidParameter(format!("degree bound {} cannot span {m} strategies", p.degree)));
        };
        adj[u].push(v);
        adj[v].push(u);
        match rng.gen_range(0..3) {
            0 => b.add_edge(u, v),
            1 => b.add_edge(v, u),
            _ => b.add_edge(u, v).add_edge(v, u),
        };
    }
    for s in 0..m {
        if rng.gen_bool(p.self_loops) {
            b.add_edge(s, s);
        }
    }
    let counts = split_agents(rng, p.agents, p.types);
    for (j, &count) in counts.iter().enumerate() {
        let strategies = if j == 0 { (0..m).collect() } else { random_subtree(rng, &adj) };
        b.add_type(count, strategies);
    }
    random_payoffs(rng, &b)
}

fn random_subtree(rng: &mut impl Rng, adj: &[Vec<StrategyId>]) -> Vec<StrategyId> {
    let size = rng.gen_range(1..=adj.len());
    let mut set = vec![rng.gen_range(0..adj.len())];
    while set.len() < size {
        let frontier: Vec<StrategyId> =
            set.iter().flat_map(|&u| adj[u].iter().copied()).filter(|v| !set.contains(v)).collect();
        let Some(&v) = frontier.choose(rng) else { break };
        set.push(v);
    }
    set.sort_unstable();
    set
}

/// A random strategy graph in which every in-neighborhood has at most
/// `degree` strategies (self-loops included). Types play random nonempty
/// strategy subsets; strategies no type picked are given to type 0.
pub fn random_general_game(rng: &mut impl Rng, p: &GenParams) -> Result<ActionGraphGame> {
    check(p)?;
    let m = p.strategies;
    let mut b = GameBuilder::with_strategy_count(m);
    for d in 0..m {
        let mut sources: Vec<StrategyId> = (0..m).collect();
        sources.shuffle(rng);
        let k = rng.gen_range(0..=p.degree.min(m));
        for &s in &sources[..k] {
            b.add_edge(s, d);
        }
    }
    let counts = split_agents(rng, p.agents, p.types);
    let mut sets: Vec<Vec<StrategyId>> = (0..p.types)
        .map(|_| {
            let mut v: Vec<StrategyId> = (0..m).filter(|_| rng.gen_bool(0.6)).collect();
            if v.is_empty() {
                v.push(rng.gen_range(0..m));
            }
            v
        })
        .collect();
    for s in 0..m {
        if !sets.iter().any(|v| v.contains(&s)) {
            sets[0].push(s);
        }
    }
    for (count, mut set) in counts.into_iter().zip(sets) {
        set.sort_unstable();
        b.add_type(count, set);
    }
    random_payoffs(rng, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use agg_core::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trees_are_valid_and_bounded() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = GenParams { agents: 3, strategies: 10, types: 2, ..GenParams::default() };
            let g = random_tree_game(&mut rng, &p).unwrap();
            let r = validate(&g);
            assert!(r.is_valid(), "{:?}", r.violations);
            assert!(r.is_tree);
            assert!(r.max_degree <= 3);
        }
    }

    #[test]
    fn general_games_are_valid() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = GenParams { agents: 4, strategies: 5, types: 2, ..GenParams::default() };
            let g = random_general_game(&mut rng, &p).unwrap();
            assert!(validate(&g).is_valid());
            assert!((0..5).all(|s| g.neighbors(s).len() <= 3));
        }
    }

    #[test]
    fn same_seed_same_game() {
        let p = GenParams::default();
        let a = random_tree_game(&mut ChaCha8Rng::seed_from_u64(7), &p).unwrap();
        let b = random_tree_game(&mut ChaCha8Rng::seed_from_u64(7), &p).unwrap();
        assert_eq!(a, b);
    }
}
