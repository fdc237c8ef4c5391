//! Report-style validation of games.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::game::ActionGraphGame;
use crate::StrategyId;

/// Violations found in a game plus structural facts used by the solver gates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub orphans: Vec<StrategyId>,
    pub strategy_count: usize,
    pub agent_count: usize,
    pub type_count: usize,
    pub max_degree: usize,
    pub is_forest: bool,
    pub is_tree: bool,
    pub self_loops: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(game: &ActionGraphGame) -> ValidationReport {
    let mut violations = Vec::new();
    let s_count = game.strategy_count();

    for (s, label) in game.labels().iter().enumerate() {
        if label.is_empty() {
            violations.push(format!("strategy {s} has an empty label"));
        }
    }

    let listed: u64 = game.types().iter().map(|t| u64::from(t.agent_count)).sum();
    if listed != u64::from(game.n()) {
        violations.push(format!("agent count mismatch: types list {listed} agents, n = {}", game.n()));
    }
    for (j, t) in game.types().iter().enumerate() {
        if t.agent_count == 0 {
            violations.push(format!("type {j} has no agents"));
        }
        if t.strategies.is_empty() {
            violations.push(format!("type {j} has no strategies"));
        }
        if t.strategies.iter().any(|&s| s >= s_count) {
            violations.push(format!("type {j} lists an unknown strategy"));
        }
        if t.strategies.windows(2).any(|w| w[0] >= w[1]) {
            violations.push(format!("type {j} strategies are not strictly ascending"));
        }
    }

    let mut seen = alloc::collections::BTreeSet::new();
    for &(a, b) in game.graph().edges() {
        if a >= s_count || b >= s_count {
            violations.push(format!("edge ({a}, {b}) has an endpoint out of range"));
        } else if !seen.insert((a, b)) {
            violations.push(format!("duplicate edge ({a}, {b})"));
        }
    }

    for (s, table) in game.utilities().iter().enumerate() {
        let missing = table.missing();
        if missing > 0 {
            violations.push(format!("incomplete utility table for strategy {s}: {missing} configurations missing"));
        }
        if !table.stray().is_empty() {
            violations.push(format!(
                "utility table for strategy {s} has {} entries that are not configurations of its neighborhood",
                table.stray().len()
            ));
        }
    }

    let graph = game.graph();
    let is_forest = graph.is_forest();
    let self_loops = (0..s_count).filter(|&s| graph.has_self_loop(s)).count();
    ValidationReport {
        violations,
        orphans: game.orphan_strategies(),
        strategy_count: s_count,
        agent_count: game.agent_count(),
        type_count: game.types().len(),
        max_degree: graph.max_degree(),
        is_forest,
        is_tree: is_forest && graph.component_count() == 1,
        self_loops,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{payoff, payoff_ratio, PlayerType};
    use alloc::vec;

    #[test]
    fn smallest_game_is_valid() {
        let g = ActionGraphGame::from_parts(
            1,
            vec!["s0".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![(0, 0)],
            vec![vec![(vec![0], payoff(0)), (vec![1], payoff_ratio(1, 2))]],
        );
        let r = validate(&g);
        assert!(r.is_valid(), "{:?}", r.violations);
        assert!(r.is_tree);
        assert_eq!(r.self_loops, 1);
    }

    #[test]
    fn incomplete_table_reported() {
        let g = ActionGraphGame::from_parts(
            1,
            vec!["s0".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![(0, 0)],
            vec![vec![(vec![1], payoff_ratio(1, 2))]],
        );
        let r = validate(&g);
        assert!(r.violations.iter().any(|v| v.contains("incomplete utility table")));
    }

    #[test]
    fn agent_count_mismatch_reported() {
        let g = ActionGraphGame::from_parts(
            2,
            vec!["s0".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![],
            vec![vec![(vec![], payoff(0))]],
        );
        let r = validate(&g);
        assert!(r.violations.iter().any(|v| v.contains("agent count mismatch")));
    }

    #[test]
    fn orphans_flagged_not_violations() {
        let g = ActionGraphGame::from_parts(
            1,
            vec!["s0".into(), "s1".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![(0, 1)],
            vec![vec![(vec![], payoff(0))], vec![(vec![0], payoff(0)), (vec![1], payoff(0))]],
        );
        let r = validate(&g);
        assert!(r.is_valid());
        assert_eq!(r.orphans, vec![1]);
    }

    #[test]
    fn duplicate_and_out_of_range_edges() {
        let g = ActionGraphGame::from_parts(
            1,
            vec!["s0".into()],
            vec![PlayerType::new(1, vec![0])],
            vec![(0, 0), (0, 0), (0, 3)],
            vec![vec![(vec![0], payoff(0)), (vec![1], payoff(0))]],
        );
        let r = validate(&g);
        assert!(r.violations.iter().any(|v| v.contains("duplicate edge")));
        assert!(r.violations.iter().any(|v| v.contains("out of range")));
    }
}
