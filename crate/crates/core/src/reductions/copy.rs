use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{count_in, payoff, ActionGraphGame, GameBuilder, Payoff};
use crate::profile::MixedProfile;
use crate::{AgentId, StrategyId};

/// Where one copy gadget sits in the extended game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CopyGadget {
    /// The copied agent.
    pub agent: AgentId,
    /// The auxiliary agent.
    pub a: AgentId,
    /// The copy.
    pub c: AgentId,
    pub f_a: StrategyId,
    pub t_a: StrategyId,
    pub f_c: StrategyId,
    pub t_c: StrategyId,
}

/// One gadget to add, optionally taking over an outgoing edge of the
/// agent's `f` strategy and one of its `t` strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CopyPlan {
    agent: AgentId,
    f_edge: Option<StrategyId>,
    t_edge: Option<StrategyId>,
}

/// The two strategies `(f, t)` of an agent that is alone in its type.
fn binary_agent(game: &ActionGraphGame, agent: AgentId) -> Result<(StrategyId, StrategyId)> {
    if agent >= game.agent_count() {
        return Err(Error::UnknownAgent(agent));
    }
    let j = game.agent_type(agent);
    let t = &game.types()[j];
    if t.agent_count != 1 || t.strategies.len() != 2 {
        return Err(Error::InvalidReduction(format!(
            "agent {agent} must be alone in its type with exactly two strategies"
        )));
    }
    Ok((t.strategies[0], t.strategies[1]))
}

fn add_copies(game: &ActionGraphGame, plans: &[CopyPlan]) -> Result<(ActionGraphGame, Vec<CopyGadget>)> {
    let m = game.strategy_count();
    let n = game.agent_count();
    let mut labels = game.labels().to_vec();
    let mut gadgets = Vec::with_capacity(plans.len());
    // For each new strategy past `m`: the original strategy it stands for
    // when it feeds a rerouted edge.
    let mut stands_for = Vec::new();
    let mut removed = Vec::new();
    let mut added = Vec::new();
    for (k, plan) in plans.iter().enumerate() {
        let (f, t) = binary_agent(game, plan.agent)?;
        let a = n + 2 * k;
        let base = labels.len();
        for (l, s) in [("a", f), ("a", t), ("c", f), ("c", t)] {
            labels.push(format!("{}/{l}{a}", game.label(s)));
        }
        let g = CopyGadget { agent: plan.agent, a, c: a + 1, f_a: base, t_a: base + 1, f_c: base + 2, t_c: base + 3 };
        stands_for.extend([None, None, Some(f), Some(t)]);
        added.extend([(f, g.f_a), (g.t_a, g.f_c), (g.f_c, g.t_a)]);
        for (src, copy, dst) in [(f, g.f_c, plan.f_edge), (t, g.t_c, plan.t_edge)] {
            let Some(dst) = dst else { continue };
            if !game.graph().edges().contains(&(src, dst)) || src == dst || removed.contains(&(src, dst)) {
                return Err(Error::InvalidReduction(format!("cannot reroute edge ({src}, {dst})")));
            }
            removed.push((src, dst));
            added.push((copy, dst));
        }
        gadgets.push(g);
    }

    let mut b = GameBuilder::new(labels);
    for t in game.types() {
        b.add_type(t.agent_count, t.strategies.clone());
    }
    for g in &gadgets {
        b.add_type(1, vec![g.f_a, g.t_a]).add_type(1, vec![g.f_c, g.t_c]);
    }
    for &e in game.graph().edges() {
        if !removed.contains(&e) {
            b.add_edge(e.0, e.1);
        }
    }
    for &(x, y) in &added {
        b.add_edge(x, y);
    }
    let gadget_of = |s: StrategyId| (s - m) / 4;
    let game_n = game.n();
    let out = b.build(|s, scope, counts| {
        if s < m {
            let old_scope = game.neighbors(s);
            let mut old = vec![0u32; old_scope.len()];
            for (&z, &x) in scope.iter().zip(counts) {
                let orig = if z < m { Some(z) } else { stands_for[z - m] };
                if let Some(k) = orig.and_then(|o| old_scope.binary_search(&o).ok()) {
                    old[k] += x;
                }
            }
            // Configurations past the old agent count cannot occur.
            if old.iter().sum::<u32>() > game_n {
                return Payoff::zero();
            }
            return game.utility(s, &old).cloned().unwrap_or_else(Payoff::zero);
        }
        let g = &gadgets[gadget_of(s)];
        let (f, _) = binary_agent(game, g.agent).expect("checked above");
        let d = |x| i64::from(count_in(scope, counts, x));
        match s - g.f_a {
            0 => payoff(d(f)),
            1 => payoff(d(g.f_c)),
            2 => payoff(1 - 2 * d(g.t_a)),
            _ => Payoff::zero(),
        }
    })?;
    Ok((out, gadgets))
}

/// Adds a copy gadget on `agent`, whose type must hold only that agent and
/// exactly the two strategies `f`, `t`. The auxiliary agent `a` and the
/// copy `c` are appended as new single-agent types with payoffs
/// `u(f_a) = D(f)`, `u(t_a) = D(f_c)`, `u(f_c) = 1 - 2 D(t_a)`, `u(t_c) = 0`
/// over the edges `f -> f_a`, `t_a <-> f_c`.
///
/// With these payoffs `a` is paid for matching the copy on `t_a` and the
/// original on `f_a`, so at an approximate equilibrium `c` plays `f_c` about
/// as often as the original plays `f`.
pub fn apply_copy_gadget(game: &ActionGraphGame, agent: AgentId) -> Result<(ActionGraphGame, CopyGadget)> {
    let (out, g) = add_copies(game, &[CopyPlan { agent, f_edge: None, t_edge: None }])?;
    Ok((out, g[0]))
}

/// Outgoing edges of `s` other than self-loops and the edge to `partner`,
/// ascending by destination.
fn out_edges(game: &ActionGraphGame, s: StrategyId, partner: StrategyId) -> Vec<StrategyId> {
    let mut v: Vec<StrategyId> =
        game.graph().edges().iter().filter(|&&(x, y)| x == s && y != s && y != partner).map(|&(_, y)| y).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Three copy gadgets per agent of a game built by
/// [`super::graphical_to_agg`]; the `k`-th outgoing edge of `f_i` and the
/// `k`-th outgoing edge of `t_i` (ascending destination) move to copy `k`.
/// The result is a forest.
pub fn sparsify_to_tw1(game: &ActionGraphGame) -> Result<(ActionGraphGame, Vec<CopyGadget>)> {
    let mut plans = Vec::new();
    for agent in 0..game.agent_count() {
        let (f, t) = binary_agent(game, agent)?;
        let fo = out_edges(game, f, t);
        let to = out_edges(game, t, f);
        if fo.len() > 3 || to.len() > 3 {
            return Err(Error::InvalidReduction(format!("agent {agent} has more than three outgoing edges per side")));
        }
        for k in 0..3 {
            plans.push(CopyPlan { agent, f_edge: fo.get(k).copied(), t_edge: to.get(k).copied() });
        }
    }
    add_copies(game, &plans)
}

/// One copy gadget per outgoing edge: the `f` edges of every agent first,
/// then its `t` edges. Used where an agent feeds both strategies of a
/// neighbor from one node, which would close a cycle through a shared copy.
pub(crate) fn sparsify_per_edge(game: &ActionGraphGame) -> Result<(ActionGraphGame, Vec<CopyGadget>)> {
    let mut plans = Vec::new();
    for agent in 0..game.agent_count() {
        let (f, t) = binary_agent(game, agent)?;
        for dst in out_edges(game, f, t) {
            plans.push(CopyPlan { agent, f_edge: Some(dst), t_edge: None });
        }
        for dst in out_edges(game, t, f) {
            plans.push(CopyPlan { agent, f_edge: None, t_edge: Some(dst) });
        }
    }
    add_copies(game, &plans)
}

/// Restriction of a profile of an extended game to the agents of `original`.
pub fn extract_subgame_profile(profile: &MixedProfile, original: &ActionGraphGame) -> Result<MixedProfile> {
    let n = original.agent_count();
    if profile.vectors.len() < n {
        return Err(Error::InvalidProfile(format!("{} agents, the original game has {n}", profile.vectors.len())));
    }
    let out = MixedProfile::new(profile.vectors[..n].to_vec());
    out.validate(original)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_pure_nash, grid_search_type_symmetric};
    use crate::reductions::graphical::{graphical_to_agg, GraphicalGame};
    use crate::validate::validate;

    /// Two single-agent types on `{f0, t0}` and `{f1, t1}` playing pennies.
    fn pennies() -> ActionGraphGame {
        let mut b = GameBuilder::with_strategy_count(4);
        b.add_type(1, vec![0, 1]).add_type(1, vec![2, 3]);
        b.add_edge(2, 0).add_edge(3, 1).add_edge(0, 2).add_edge(1, 3);
        b.build(|s, _, c| {
            let matched = c[0] == 1;
            payoff(i64::from(if s < 2 { matched } else { !matched }))
        })
        .unwrap()
    }

    fn reachable(game: &ActionGraphGame, from: StrategyId) -> Vec<bool> {
        let adj = game.graph().undirected_adjacency();
        let mut seen = vec![false; game.strategy_count()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn gadget_tables() {
        let (g, c) = apply_copy_gadget(&pennies(), 0).unwrap();
        assert!(validate(&g).is_valid());
        assert_eq!((g.agent_count(), g.strategy_count()), (4, 8));
        assert_eq!((c.a, c.c, c.f_a, c.t_c), (2, 3, 4, 7));
        assert_eq!(g.neighbors(c.f_a), &[0]);
        assert_eq!(g.neighbors(c.t_a), &[c.f_c]);
        assert_eq!(g.neighbors(c.f_c), &[c.t_a]);
        assert!(g.neighbors(c.t_c).is_empty());
        for d in 0..=1u32 {
            assert_eq!(g.utility(c.f_a, &[d]), Some(&payoff(i64::from(d))));
            assert_eq!(g.utility(c.t_a, &[d]), Some(&payoff(i64::from(d))));
            assert_eq!(g.utility(c.f_c, &[d]), Some(&payoff(1 - 2 * i64::from(d))));
        }
        assert_eq!(g.utility(c.t_c, &[]), Some(&payoff(0)));
        assert_eq!(g.utility(0, &[1]), Some(&payoff(1)));
        let seen = reachable(&g, 0);
        assert!(!seen[c.f_c] && !seen[c.t_c]);
        let seen = reachable(&g, 1);
        assert!(!seen[c.f_c] && !seen[c.t_c]);
    }

    #[test]
    fn rejects_wide_agents() {
        let mut b = GameBuilder::with_strategy_count(3);
        b.add_type(1, vec![0, 1, 2]);
        let g = b.build(|_, _, _| payoff(0)).unwrap();
        assert!(matches!(apply_copy_gadget(&g, 0), Err(Error::InvalidReduction(_))));
        assert!(matches!(apply_copy_gadget(&g, 4), Err(Error::UnknownAgent(4))));
    }

    #[test]
    fn copies_track_the_original() {
        let (g, c) = apply_copy_gadget(&pennies(), 0).unwrap();
        let eps: f64 = 0.2;
        let found = grid_search_type_symmetric(&g, 0.05, eps * eps).unwrap();
        assert!(!found.is_empty());
        for p in found {
            let pi = p.vectors[0][0];
            let pc = p.vectors[g.agent_type(c.c)][0];
            assert!((pi - pc).abs() <= eps + 1e-9, "{pi} vs {pc}");
        }
    }

    #[test]
    fn sparsified_graphical_game_is_a_forest_with_the_same_pure_equilibria() {
        // A triangle plus a pendant player.
        let h = GraphicalGame::new(
            4,
            vec![(0, 1), (1, 2), (0, 2), (2, 3)],
            vec![
                vec![1, 0, 0, 2, 0, 1, 2, 0],
                vec![2, 0, 1, 0, 0, 1, 0, 2],
                (0..16).map(|x| (x * 7 % 3) as u8).collect(),
                vec![1, 0, 0, 1],
            ],
        )
        .unwrap();
        let a = graphical_to_agg(&h).unwrap();
        assert!(!a.graph().is_forest());
        let (s, gadgets) = sparsify_to_tw1(&a).unwrap();
        assert!(validate(&s).is_valid());
        assert!(s.graph().is_forest());
        assert!(s.graph().max_degree() <= 6);
        assert_eq!(gadgets.len(), 12);
        assert_eq!(s.agent_count(), 4 + 24);
        let original = enumerate_pure_nash(&a).unwrap();
        let sparse = enumerate_pure_nash(&s).unwrap();
        let restricted: Vec<Vec<usize>> = sparse.iter().map(|p| p[..4].to_vec()).collect();
        assert_eq!(restricted, original);
        for p in &sparse {
            let mp = MixedProfile::pure(&s, p).unwrap();
            let sub = extract_subgame_profile(&mp, &a).unwrap();
            assert_eq!(sub.vectors.len(), 4);
        }
    }
}
