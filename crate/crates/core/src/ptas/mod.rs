//! Approximate equilibria of tree-structured action-graph games.
//!
//! The solver discretizes every type's mixed strategy to multiples of
//! `delta` and every equilibrium value to multiples of `eps/2`, fills
//! feasibility tables bottom-up over the rooted strategy tree and reads a
//! type-symmetric profile back top-down. The result is always verified with
//! the exact expected-utility code before it is returned.

mod grid;
mod normalize;
mod rounding;
mod tables;
mod tree;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expected_utility::{regret, NASH_SLACK};
use crate::game::ActionGraphGame;
use crate::profile::{expand_profile, TypeSymmetricProfile};
use crate::validate::validate;
use crate::StrategyId;

pub use grid::GridSpec;
pub use normalize::{normalize_payoffs, PayoffMap};
pub use rounding::{round_profile_to_grid, round_vector};
pub use tables::{build_tables, DpTables, Reconstruction};
pub use tree::{choose_root, degree_bound, type_regions, RootedTree, TypeRegions};

/// Boundary convention of the utility windows around a target value `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowRule {
    /// `[v - eps/2, v + eps/2)`.
    HalfOpen,
    /// `(v - eps/2, v + eps/2)`.
    Open,
}

/// Tuning knobs of the table construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PtasOptions {
    pub window: WindowRule,
    /// Skip probability triples whose subtree table is already empty.
    /// Never changes the result.
    pub prune: bool,
    /// Soft cap on the number of player types.
    pub max_types: usize,
    /// Largest table (in 64-bit words) any node may allocate.
    pub table_limit: u128,
}

impl Default for PtasOptions {
    fn default() -> Self {
        PtasOptions { window: WindowRule::HalfOpen, prune: true, max_types: 4, table_limit: 1 << 27 }
    }
}

/// How the probability step is picked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridMode {
    /// `delta = eps / (2 d n)`; the returned regret is guaranteed to be at most `eps`.
    Theoretical,
    /// `delta = eps / (8 d n)`, fine enough that a feasible table entry always exists.
    Guaranteed,
    /// An explicit step; a coarse one may leave the tables empty.
    Delta(f64),
}

/// A solved game.
#[derive(Clone, Debug, PartialEq)]
pub struct PtasSolution {
    pub profile: TypeSymmetricProfile,
    /// Units out of `grid.units()` per type, aligned with the type's strategies.
    pub units: Vec<Vec<u32>>,
    pub grid: GridSpec,
    /// Verified max regret after payoff normalization.
    pub regret: f64,
    /// The same regret in the game's own payoff units.
    pub regret_original: f64,
    pub map: PayoffMap,
    pub root: StrategyId,
    /// Target value picked for each type.
    pub values: Vec<f64>,
}

pub fn ptas_solve(game: &ActionGraphGame, eps: f64, mode: GridMode) -> Result<PtasSolution> {
    ptas_solve_with(game, eps, mode, &PtasOptions::default())
}

/// Like [`ptas_solve`] but additionally requires every type's strategy set
/// to be connected in the tree and at most `cap` types to meet at any node.
pub fn ptas_solve_overlap(game: &ActionGraphGame, eps: f64, mode: GridMode, cap: usize) -> Result<PtasSolution> {
    let options = PtasOptions::default();
    let tree = gate(game, eps, &options)?;
    let regions = type_regions(game, &tree);
    for j in 0..game.types().len() {
        if !regions.is_connected(game, j) {
            return Err(Error::RegionDisconnected(j));
        }
    }
    if regions.overlap > cap {
        return Err(Error::OverlapExceeded { overlap: regions.overlap, cap });
    }
    solve_rooted(game, eps, mode, &options, tree)
}

pub fn ptas_solve_with(game: &ActionGraphGame, eps: f64, mode: GridMode, options: &PtasOptions) -> Result<PtasSolution> {
    let tree = gate(game, eps, options)?;
    solve_rooted(game, eps, mode, options, tree)
}

fn gate(game: &ActionGraphGame, eps: f64, options: &PtasOptions) -> Result<RootedTree> {
    let report = validate(game);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidGame(v.clone()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    let tree = choose_root(game.graph())?;
    let types = game.types().len();
    if types > options.max_types {
        return Err(Error::TooManyTypes { types, cap: options.max_types });
    }
    Ok(tree)
}

/// The grid a solve of `game` at `eps` would use.
pub fn grid_for(game: &ActionGraphGame, eps: f64, mode: GridMode) -> Result<GridSpec> {
    let d = degree_bound(game);
    match mode {
        GridMode::Theoretical => GridSpec::theoretical(eps, d, game.n()),
        GridMode::Guaranteed => GridSpec::guaranteed(eps, d, game.n()),
        GridMode::Delta(delta) => GridSpec::new(eps, delta),
    }
}

fn solve_rooted(
    game: &ActionGraphGame,
    eps: f64,
    mode: GridMode,
    options: &PtasOptions,
    tree: RootedTree,
) -> Result<PtasSolution> {
    let (normalized, map) = normalize_payoffs(game);
    let grid = grid_for(&normalized, eps, mode)?;
    let root = tree.root();
    let regions = type_regions(&normalized, &tree);
    let tables = build_tables(&normalized, tree, regions, grid.clone(), options)?;
    let rec = tables.reconstruct()?;
    let scale = f64::from(grid.units());
    let profile = TypeSymmetricProfile::new(
        rec.units.iter().map(|u| u.iter().map(|&q| f64::from(q) / scale).collect()).collect(),
    );
    let report = regret(&normalized, &expand_profile(&profile, &normalized)?)?;
    if mode == GridMode::Theoretical && report.max > eps + NASH_SLACK {
        return Err(Error::VerificationFailed { regret: report.max, eps });
    }
    Ok(PtasSolution {
        profile,
        units: rec.units,
        grid,
        regret: report.max,
        regret_original: map.to_original(report.max),
        map,
        root,
        values: rec.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected_utility::is_eps_nash;
    use crate::game::{payoff, payoff_ratio, GameBuilder};
    use crate::oracle::grid_search_type_symmetric;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn single() -> ActionGraphGame {
        let mut b = GameBuilder::with_strategy_count(1);
        b.add_type(1, vec![0]);
        b.build(|_, _, _| payoff_ratio(1, 2)).unwrap()
    }

    /// One type on `f`, `t` with `u(f) = D(t)/n`, `u(t) = D(f)/n`.
    fn anti_coordination(n: u32) -> ActionGraphGame {
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(n, vec![0, 1]).add_edge(0, 1).add_edge(1, 0);
        b.build(move |_, _, c| payoff_ratio(i64::from(c[0]), i64::from(n))).unwrap()
    }

    fn random_tree_game(rng: &mut impl Rng, n: u32, m: usize, types: usize) -> ActionGraphGame {
        let mut edges = Vec::new();
        let mut deg = vec![0usize; m];
        for s in 1..m {
            let candidates: Vec<usize> = (0..s).filter(|&p| deg[p] < 3).collect();
            let p = candidates[rng.gen_range(0..candidates.len())];
            deg[p] += 1;
            deg[s] += 1;
            if rng.gen_bool(0.5) {
                edges.push((p, s));
            } else {
                edges.push((s, p));
            }
            if rng.gen_bool(0.3) {
                edges.push(if edges.last() == Some(&(p, s)) { (s, p) } else { (p, s) });
            }
        }
        let mut b = GameBuilder::with_strategy_count(m);
        let mut left = n;
        for j in 0..types {
            let count = if j + 1 == types { left } else { 1 };
            left -= count;
            let mut strategies: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.6)).collect();
            if strategies.is_empty() {
                strategies.push(rng.gen_range(0..m));
            }
            b.add_type(count, strategies);
        }
        for (a, c) in edges {
            b.add_edge(a, c);
        }
        let seed: u64 = rng.gen();
        b.build(move |s, _, c| {
            let h = c.iter().fold(seed ^ (s as u64).wrapping_mul(0x9e37), |h, &x| {
                h.wrapping_mul(6364136223846793005).wrapping_add(u64::from(x) + 1)
            });
            payoff_ratio((h >> 33) as i64 % 11, 10)
        })
        .unwrap()
    }

    #[test]
    fn single_strategy() {
        let g = single();
        let sol = ptas_solve(&g, 0.3, GridMode::Theoretical).unwrap();
        assert_eq!(sol.profile.vectors, vec![vec![1.0]]);
        assert_eq!(sol.regret, 0.0);
        assert!((sol.values[0] - 0.5).abs() <= 0.15 + 1e-12);
    }

    #[test]
    fn gates() {
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(1, vec![0, 1]);
        let g = b.build(|_, _, _| payoff(0)).unwrap();
        assert!(matches!(ptas_solve(&g, 0.5, GridMode::Theoretical), Err(Error::NotATree(_))));
        assert!(matches!(ptas_solve(&single(), 0.0, GridMode::Theoretical), Err(Error::InvalidParameter(_))));
        let mut b = GameBuilder::with_strategy_count(2);
        for _ in 0..5 {
            b.add_type(1, vec![0, 1]);
        }
        b.add_edge(0, 1);
        let g = b.build(|_, _, _| payoff(0)).unwrap();
        assert!(matches!(ptas_solve(&g, 0.5, GridMode::Theoretical), Err(Error::TooManyTypes { types: 5, cap: 4 })));
    }

    #[test]
    fn constant_path_is_feasible_everywhere() {
        let mut b = GameBuilder::with_strategy_count(3);
        b.add_type(2, vec![0, 1, 2]).add_edge(0, 1).add_edge(1, 2);
        let g = b.build(|_, _, _| payoff(0)).unwrap();
        let grid = GridSpec::new(0.5, 0.25).unwrap();
        let tree = choose_root(g.graph()).unwrap();
        let regions = type_regions(&g, &tree);
        let t = build_tables(&g, tree, regions, grid, &PtasOptions::default()).unwrap();
        // Every split of the four units over the path works with v = 0.
        let roots = t.feasible_roots();
        assert_eq!(roots.len(), 5);
        let oracle = grid_search_type_symmetric(&g, 0.25, 0.5).unwrap();
        assert_eq!(oracle.len(), 15);
        for pc in 0..=4u32 {
            for pr in 0..=4 - pc {
                assert!(t.root_entry(&[pc], &[pr], &[], &[0]));
                assert!(t.f_entry(0, &[pc], &[pr], &[], &[0], &[4]));
            }
        }
        let sol = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
        assert_eq!(sol.regret, 0.0);
    }

    #[test]
    fn dominance_puts_all_mass_on_the_better_strategy() {
        let mut b = GameBuilder::with_strategy_count(2);
        b.add_type(3, vec![0, 1]).add_edge(0, 1);
        let g = b.build(|s, _, _| payoff(i64::from(s == 0))).unwrap();
        let sol = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
        assert_eq!(sol.profile.vectors, vec![vec![1.0, 0.0]]);
        assert_eq!(sol.regret, 0.0);
        assert!(sol.values[0] >= 0.75);
    }

    #[test]
    fn anti_coordination_mixes_near_half() {
        let g = anti_coordination(2);
        // At eps = 0.5 both pure profiles already qualify; 0.3 forces mixing.
        let sol = ptas_solve(&g, 0.3, GridMode::Theoretical).unwrap();
        assert!(sol.regret <= 0.3);
        let p = sol.profile.vectors[0][0];
        assert!(p > 0.0 && p < 1.0);
        let found = grid_search_type_symmetric(&g, 0.1, 0.3).unwrap();
        assert!(found.iter().any(|q| (q.vectors[0][0] - 0.5).abs() < 1e-9));
        assert!(found.iter().any(|q| (q.vectors[0][0] - p).abs() <= 0.1));
    }

    #[test]
    fn window_rule_is_configurable() {
        let g = anti_coordination(2);
        let options = PtasOptions { window: WindowRule::Open, ..PtasOptions::default() };
        let sol = ptas_solve_with(&g, 0.5, GridMode::Theoretical, &options).unwrap();
        assert!(sol.regret <= 0.5);
    }

    #[test]
    fn random_trees_are_sound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let m = rng.gen_range(1..6);
            let n = rng.gen_range(1..4);
            let g = random_tree_game(&mut rng, n, m, 1);
            let sol = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
            assert!(is_eps_nash(&g, &expand_profile(&sol.profile, &g).unwrap(), 0.5 * sol.map.scale()).unwrap());
            for u in &sol.units {
                assert_eq!(u.iter().sum::<u32>(), sol.grid.units());
            }
        }
    }

    #[test]
    fn pruning_does_not_change_tables() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = rng.gen_range(1..5);
            let types = rng.gen_range(1..3);
            let n = rng.gen_range(types as u32..4);
            let g = random_tree_game(&mut rng, n, m, types);
            let (g, _) = normalize_payoffs(&g);
            let grid = GridSpec::new(0.5, 0.25).unwrap();
            let build = |prune| {
                let tree = choose_root(g.graph()).unwrap();
                let regions = type_regions(&g, &tree);
                let options = PtasOptions { prune, ..PtasOptions::default() };
                let t = build_tables(&g, tree, regions, grid.clone(), &options).unwrap();
                (t.feasible_roots(), t.reconstruct().ok())
            };
            assert_eq!(build(true), build(false));
        }
    }

    #[test]
    fn two_types_are_sound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..6 {
            let m = rng.gen_range(2..5);
            let g = random_tree_game(&mut rng, 2, m, 2);
            let sol = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
            assert!(sol.regret <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn overlap_with_one_type_matches_the_plain_solver() {
        let g = anti_coordination(3);
        let a = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
        let b = ptas_solve_overlap(&g, 0.5, GridMode::Theoretical, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overlap_disjoint_regions() {
        // Path 0-1-2-3; type 0 on {0, 1}, type 1 on {2, 3}.
        let mut b = GameBuilder::with_strategy_count(4);
        b.add_type(1, vec![0, 1]).add_type(1, vec![2, 3]);
        b.add_edge(0, 1).add_edge(1, 2).add_edge(2, 1).add_edge(3, 2);
        let g = b.build(|s, _, c| payoff_ratio(i64::from(c.iter().sum::<u32>() % 2) + s as i64 % 2, 2)).unwrap();
        let sol = ptas_solve_overlap(&g, 0.5, GridMode::Theoretical, 3).unwrap();
        assert!(sol.regret <= 0.5);
        assert!(matches!(ptas_solve_overlap(&g, 0.5, GridMode::Theoretical, 0), Err(Error::OverlapExceeded { .. })));
    }

    #[test]
    fn overlap_rejects_disconnected_regions() {
        let mut b = GameBuilder::with_strategy_count(3);
        b.add_type(1, vec![0, 2]).add_type(1, vec![1]);
        b.add_edge(0, 1).add_edge(1, 2);
        let g = b.build(|_, _, _| payoff(0)).unwrap();
        assert!(matches!(ptas_solve_overlap(&g, 0.5, GridMode::Theoretical, 3), Err(Error::RegionDisconnected(0))));
        assert!(ptas_solve(&g, 0.5, GridMode::Theoretical).is_ok());
    }

    #[test]
    fn coarse_grid_may_be_infeasible_but_never_wrong() {
        let g = anti_coordination(2);
        match ptas_solve(&g, 0.2, GridMode::Delta(1.0)) {
            Err(Error::NoFeasibleRootEntry) => {}
            Ok(sol) => assert_eq!(sol.grid.units(), 1),
            Err(e) => panic!("{e:?}"),
        }
    }
}
