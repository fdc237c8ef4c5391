//! In-memory action-graph games.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::config::{self, next_config};
use crate::error::{Error, Result};
use crate::{AgentId, StrategyId};

/// Exact payoff value.
pub type Payoff = BigRational;

/// Integer payoff helper.
pub fn payoff(v: i64) -> Payoff {
    BigRational::from_integer(BigInt::from(v))
}

/// Ratio payoff helper; panics on a zero denominator.
pub fn payoff_ratio(num: i64, den: i64) -> Payoff {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn to_f64(p: &Payoff) -> f64 {
    p.to_f64().unwrap_or(f64::NAN)
}

/// Directed strategy graph. `edges` keeps the input order (duplicates and
/// out-of-range endpoints are reported by the validator); the neighbor lists
/// are deduplicated and ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyGraph {
    node_count: usize,
    edges: Vec<(StrategyId, StrategyId)>,
    in_neighbors: Vec<Vec<StrategyId>>,
}

impl StrategyGraph {
    pub fn new(node_count: usize, edges: Vec<(StrategyId, StrategyId)>) -> Self {
        let mut sets = vec![BTreeSet::new(); node_count];
        for &(src, dst) in &edges {
            if src < node_count && dst < node_count {
                sets[dst].insert(src);
            }
        }
        let in_neighbors = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        StrategyGraph { node_count, edges, in_neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(StrategyId, StrategyId)] {
        &self.edges
    }

    /// `nu(s)`: strategies `s'` with an edge `(s', s)`, ascending.
    pub fn neighbors(&self, s: StrategyId) -> &[StrategyId] {
        &self.in_neighbors[s]
    }

    pub fn has_self_loop(&self, s: StrategyId) -> bool {
        self.in_neighbors[s].binary_search(&s).is_ok()
    }

    /// Neighbors in the underlying undirected simple graph, self-loops dropped.
    pub fn undirected_adjacency(&self) -> Vec<Vec<StrategyId>> {
        let mut sets = vec![BTreeSet::new(); self.node_count];
        for &(a, b) in &self.edges {
            if a < self.node_count && b < self.node_count && a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        sets.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.undirected_adjacency().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// True when the underlying undirected simple graph has no cycle.
    pub fn is_forest(&self) -> bool {
        let adj = self.undirected_adjacency();
        let edge_count: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
        edge_count + self.component_count_of(&adj) == self.node_count
    }

    pub fn component_count(&self) -> usize {
        self.component_count_of(&self.undirected_adjacency())
    }

    fn component_count_of(&self, adj: &[Vec<StrategyId>]) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// Undirected reachability between two strategies.
    pub fn connected(&self, a: StrategyId, b: StrategyId) -> bool {
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![a];
        seen[a] = true;
        while let Some(v) = stack.pop() {
            if v == b {
                return true;
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }
}

/// A class of agents sharing one allowed-strategy set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerType {
    pub agent_count: u32,
    pub strategies: Vec<StrategyId>,
}

impl PlayerType {
    pub fn new(agent_count: u32, strategies: Vec<StrategyId>) -> Self {
        PlayerType { agent_count, strategies }
    }
}

/// Payoffs of one strategy over every configuration of its neighborhood.
///
/// `values[rank]` is indexed by the lexicographic rank of the configuration
/// over `scope` with at most `n` agents. Entries supplied with a shape that
/// does not fit (wrong length, too many agents) are kept in `stray` so that
/// the validator can report them.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    strategy: StrategyId,
    scope: Vec<StrategyId>,
    n: u32,
    values: Vec<Option<Payoff>>,
    approx: Vec<f64>,
    stray: Vec<(Vec<u32>, Payoff)>,
}

impl UtilityTable {
    fn from_entries(
        strategy: StrategyId,
        scope: Vec<StrategyId>,
        n: u32,
        entries: Vec<(Vec<u32>, Payoff)>,
    ) -> Self {
        let len = config::config_count(scope.len(), n)
            .and_then(|c| usize::try_from(c).ok())
            .expect("utility table too large");
        let mut values = vec![None; len];
        let mut stray = Vec::new();
        for (counts, p) in entries {
            let slot = if counts.len() == scope.len() { config::rank(&counts, n) } else { None };
            match slot {
                Some(i) if values[i].is_none() => values[i] = Some(p),
                _ => stray.push((counts, p)),
            }
        }
        let approx = values.iter().map(|v| v.as_ref().map_or(f64::NAN, to_f64)).collect();
        UtilityTable { strategy, scope, n, values, approx, stray }
    }

    pub fn strategy(&self) -> StrategyId {
        self.strategy
    }

    pub fn scope(&self) -> &[StrategyId] {
        &self.scope
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn stray(&self) -> &[(Vec<u32>, Payoff)] {
        &self.stray
    }

    pub fn get(&self, counts: &[u32]) -> Option<&Payoff> {
        if counts.len() != self.scope.len() {
            return None;
        }
        config::rank(counts, self.n).and_then(|i| self.values[i].as_ref())
    }

    pub fn get_rank(&self, rank: usize) -> Option<&Payoff> {
        self.values.get(rank).and_then(Option::as_ref)
    }

    /// Binary64 view of the payoff at `rank` (NaN when missing).
    pub fn approx_rank(&self, rank: usize) -> f64 {
        self.approx[rank]
    }

    /// Present entries in lexicographic configuration order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<u32>, &Payoff)> + '_ {
        let mut cur = vec![0u32; self.scope.len()];
        let mut done = false;
        let n = self.n;
        self.values.iter().filter_map(move |v| {
            if done {
                return None;
            }
            let counts = cur.clone();
            done = !next_config(&mut cur, n);
            v.as_ref().map(|p| (counts, p))
        })
    }
}

/// An action-graph game `<P, S, G, u>` with agents grouped into player types.
///
/// Immutable after construction. Agents are numbered type by type: type 0's
/// agents come first.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGraphGame {
    n: u32,
    labels: Vec<String>,
    types: Vec<PlayerType>,
    graph: StrategyGraph,
    utilities: Vec<UtilityTable>,
    payoff_bounds: Option<(Payoff, Payoff)>,
    agent_types: Vec<usize>,
}

impl ActionGraphGame {
    /// Assembles a game from raw parts without semantic checks; run
    /// [`crate::validate`] to find violations. `entries[s]` lists the
    /// payoff entries of strategy `s`.
    pub fn from_parts(
        n: u32,
        labels: Vec<String>,
        types: Vec<PlayerType>,
        edges: Vec<(StrategyId, StrategyId)>,
        entries: Vec<Vec<(Vec<u32>, Payoff)>>,
    ) -> Self {
        let graph = StrategyGraph::new(labels.len(), edges);
        let mut entries = entries;
        entries.resize_with(labels.len(), Vec::new);
        let utilities: Vec<UtilityTable> = entries
            .into_iter()
            .enumerate()
            .map(|(s, e)| UtilityTable::from_entries(s, graph.neighbors(s).to_vec(), n, e))
            .collect();
        Self::assemble(n, labels, types, graph, utilities)
    }

    fn assemble(
        n: u32,
        labels: Vec<String>,
        types: Vec<PlayerType>,
        graph: StrategyGraph,
        utilities: Vec<UtilityTable>,
    ) -> Self {
        let mut bounds: Option<(Payoff, Payoff)> = None;
        for p in utilities.iter().flat_map(|t| t.values.iter().flatten()) {
            bounds = Some(match bounds {
                None => (p.clone(), p.clone()),
                Some((lo, hi)) => {
                    (if *p < lo { p.clone() } else { lo }, if *p > hi { p.clone() } else { hi })
                }
            });
        }
        let agent_types = types
            .iter()
            .enumerate()
            .flat_map(|(j, t)| core::iter::repeat(j).take(t.agent_count as usize))
            .collect();
        ActionGraphGame { n, labels, types, graph, utilities, payoff_bounds: bounds, agent_types }
    }

    /// Total agent count `n` as declared.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn strategy_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, s: StrategyId) -> &str {
        &self.labels[s]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn types(&self) -> &[PlayerType] {
        &self.types
    }

    pub fn graph(&self) -> &StrategyGraph {
        &self.graph
    }

    pub fn utility_table(&self, s: StrategyId) -> &UtilityTable {
        &self.utilities[s]
    }

    pub fn utilities(&self) -> &[UtilityTable] {
        &self.utilities
    }

    pub fn payoff_bounds(&self) -> Option<&(Payoff, Payoff)> {
        self.payoff_bounds.as_ref()
    }

    /// Number of agents actually listed by the types.
    pub fn agent_count(&self) -> usize {
        self.agent_types.len()
    }

    pub fn agent_type(&self, agent: AgentId) -> usize {
        self.agent_types[agent]
    }

    pub fn agent_strategies(&self, agent: AgentId) -> &[StrategyId] {
        &self.types[self.agent_types[agent]].strategies
    }

    /// First agent id of type `j`.
    pub fn first_agent_of_type(&self, j: usize) -> AgentId {
        self.types[..j].iter().map(|t| t.agent_count as usize).sum()
    }

    pub fn neighbors(&self, s: StrategyId) -> &[StrategyId] {
        self.graph.neighbors(s)
    }

    /// Exact payoff of strategy `s` at a configuration over `nu(s)`.
    pub fn utility(&self, s: StrategyId, counts: &[u32]) -> Option<&Payoff> {
        self.utilities[s].get(counts)
    }

    pub fn utility_f64(&self, s: StrategyId, counts: &[u32]) -> Option<f64> {
        let t = &self.utilities[s];
        config::rank(counts, self.n).filter(|&r| r < t.len()).map(|r| t.approx[r])
    }

    /// Strategies that no type may play.
    pub fn orphan_strategies(&self) -> Vec<StrategyId> {
        let mut used = vec![false; self.strategy_count()];
        for t in &self.types {
            for &s in &t.strategies {
                if s < used.len() {
                    used[s] = true;
                }
            }
        }
        (0..used.len()).filter(|&s| !used[s]).collect()
    }

    /// Copy of the game with every payoff replaced by `f(payoff)`.
    pub fn map_payoffs(&self, mut f: impl FnMut(&Payoff) -> Payoff) -> Self {
        let utilities = self
            .utilities
            .iter()
            .map(|t| {
                let values: Vec<Option<Payoff>> =
                    t.values.iter().map(|v| v.as_ref().map(&mut f)).collect();
                let approx = values.iter().map(|v| v.as_ref().map_or(f64::NAN, to_f64)).collect();
                let stray = t.stray.iter().map(|(c, p)| (c.clone(), f(p))).collect();
                UtilityTable { values, approx, stray, ..t.clone() }
            })
            .collect();
        Self::assemble(self.n, self.labels.clone(), self.types.clone(), self.graph.clone(), utilities)
    }
}

/// Builds complete games from a payoff function over neighborhood
/// configurations. Used by the reductions and the generators.
#[derive(Debug, Clone)]
pub struct GameBuilder {
    labels: Vec<String>,
    types: Vec<PlayerType>,
    edges: Vec<(StrategyId, StrategyId)>,
    entry_limit: u128,
}

impl GameBuilder {
    pub const DEFAULT_ENTRY_LIMIT: u128 = 20_000_000;

    pub fn new(labels: Vec<String>) -> Self {
        GameBuilder { labels, types: Vec::new(), edges: Vec::new(), entry_limit: Self::DEFAULT_ENTRY_LIMIT }
    }

    /// Strategies labelled `s0, s1, ...`.
    pub fn with_strategy_count(count: usize) -> Self {
        Self::new((0..count).map(|i| format!("s{i}")).collect())
    }

    pub fn strategy_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_strategy(&mut self, label: String) -> StrategyId {
        self.labels.push(label);
        self.labels.len() - 1
    }

    pub fn add_type(&mut self, agent_count: u32, strategies: Vec<StrategyId>) -> &mut Self {
        self.types.push(PlayerType::new(agent_count, strategies));
        self
    }

    /// Adds a directed edge `(src, dst)`; repeated edges are ignored.
    pub fn add_edge(&mut self, src: StrategyId, dst: StrategyId) -> &mut Self {
        if !self.edges.contains(&(src, dst)) {
            self.edges.push((src, dst));
        }
        self
    }

    pub fn entry_limit(&mut self, limit: u128) -> &mut Self {
        self.entry_limit = limit;
        self
    }

    /// Total number of table entries the game would have.
    pub fn entry_count(&self) -> u128 {
        let n: u32 = self.types.iter().map(|t| t.agent_count).sum();
        let graph = StrategyGraph::new(self.labels.len(), self.edges.clone());
        (0..self.labels.len())
            .map(|s| config::config_count(graph.neighbors(s).len(), n).unwrap_or(u128::MAX))
            .fold(0u128, u128::saturating_add)
    }

    /// Fills every table with `payoff(s, nu(s), counts)`.
    pub fn build(
        &self,
        mut payoff: impl FnMut(StrategyId, &[StrategyId], &[u32]) -> Payoff,
    ) -> Result<ActionGraphGame> {
        let entries = self.entry_count();
        if entries > self.entry_limit {
            return Err(Error::GuardExceeded { what: "utility table entries", size: entries, limit: self.entry_limit });
        }
        let n: u32 = self.types.iter().map(|t| t.agent_count).sum();
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        let graph = StrategyGraph::new(self.labels.len(), edges);
        let utilities = (0..self.labels.len())
            .map(|s| {
                let scope = graph.neighbors(s).to_vec();
                let len = config::config_count(scope.len(), n).unwrap() as usize;
                let mut values = Vec::with_capacity(len);
                let mut cur = vec![0u32; scope.len()];
                loop {
                    values.push(Some(payoff(s, &scope, &cur)));
                    if !next_config(&mut cur, n) {
                        break;
                    }
                }
                let approx = values.iter().map(|v| v.as_ref().map_or(f64::NAN, to_f64)).collect();
                UtilityTable { strategy: s, scope, n, values, approx, stray: Vec::new() }
            })
            .collect();
        Ok(ActionGraphGame::assemble(n, self.labels.clone(), self.types.clone(), graph, utilities))
    }
}

/// Count on strategy `s` in a configuration over `scope`; zero when `s` is
/// outside the scope.
pub fn count_in(scope: &[StrategyId], counts: &[u32], s: StrategyId) -> u32 {
    scope.binary_search(&s).map_or(0, |i| counts[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coordination() -> ActionGraphGame {
        // Two agents on {a, b}; a strategy pays 1 when the other agent joins it.
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(2, vec![0, 1]).add_edge(0, 0).add_edge(1, 1);
        b.build(|_, _, c| payoff(i64::from(c[0] == 2))).unwrap()
    }

    #[test]
    fn builder_fills_complete_tables() {
        let g = coordination();
        assert_eq!(g.n(), 2);
        assert_eq!(g.agent_count(), 2);
        assert_eq!(g.utility_table(0).len(), 3);
        assert_eq!(g.utility(0, &[2]), Some(&payoff(1)));
        assert_eq!(g.utility(0, &[1]), Some(&payoff(0)));
        assert_eq!(g.payoff_bounds(), Some(&(payoff(0), payoff(1))));
    }

    #[test]
    fn entries_iterate_in_lex_order() {
        let g = coordination();
        let e: Vec<_> = g.utility_table(1).entries().map(|(c, _)| c).collect();
        assert_eq!(e, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn from_parts_keeps_stray_entries() {
        let g = ActionGraphGame::from_parts(
            1,
            vec!["a".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![(0, 0)],
            vec![vec![(vec![1], payoff(1)), (vec![0], payoff(0)), (vec![5], payoff(2))]],
        );
        assert_eq!(g.utility_table(0).missing(), 0);
        assert_eq!(g.utility_table(0).stray().len(), 1);
    }

    #[test]
    fn forest_and_degree() {
        let path = StrategyGraph::new(3, vec![(0, 1), (1, 2), (2, 1)]);
        assert!(path.is_forest());
        assert_eq!(path.max_degree(), 2);
        let cycle = StrategyGraph::new(3, vec![(0, 1), (1, 2), (2, 0)]);
        assert!(!cycle.is_forest());
        let looped = StrategyGraph::new(2, vec![(0, 0), (0, 1)]);
        assert!(looped.is_forest());
        assert!(looped.has_self_loop(0));
    }

    #[test]
    fn entry_guard() {
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(100, vec![0, 1]).add_edge(0, 1).add_edge(1, 1).entry_limit(10);
        assert!(matches!(b.build(|_, _, _| payoff(0)), Err(Error::GuardExceeded { .. })));
    }
}
