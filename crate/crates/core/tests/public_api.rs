use agg_core::game::{payoff, payoff_ratio, GameBuilder};
use agg_core::oracle::{
    binomial_tv_distance, brute_force_expected_utility, enumerate_pure_nash, grid_search_type_symmetric,
};
use agg_core::ptas::{ptas_solve, round_profile_to_grid, GridMode};
use agg_core::{
    enumerate_configurations, expand_profile, expected_utility, is_eps_nash, regret, validate, ActionGraphGame,
    MixedProfile, TypeSymmetricProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Agent 0 on `{0, 1}` wants to match agent 1 on `{2, 3}`, who wants to differ.
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

/// Two agents on `{f, t}`; `u(f) = D(t) / n` and `u(t) = D(f) / n`.
fn anti_coordination() -> ActionGraphGame {
    let mut b = GameBuilder::with_strategy_count(2);
    b.add_type(2, vec![0, 1]).add_edge(0, 1).add_edge(1, 0);
    b.build(|_, _, c| payoff_ratio(i64::from(c[0]), 2)).unwrap()
}

#[test]
fn configuration_counts() {
    let all = enumerate_configurations(&[0, 1, 2], 4).unwrap();
    assert_eq!(all.len(), 35);
    let mut brute = Vec::new();
    for a in 0..=4u32 {
        for b in 0..=4 - a {
            for c in 0..=4 - a - b {
                brute.push(vec![a, b, c]);
            }
        }
    }
    assert_eq!(all.iter().map(|c| c.counts.clone()).collect::<Vec<_>>(), brute);
}

#[test]
fn pennies_regrets() {
    let g = pennies();
    assert!(validate(&g).is_valid());
    for (x, y) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        let p = MixedProfile::pure(&g, &[x, y]).unwrap();
        assert_eq!(regret(&g, &p).unwrap().max, 1.0);
        assert!(!is_eps_nash(&g, &p, 0.5).unwrap());
        assert!(is_eps_nash(&g, &p, 1.0).unwrap());
    }
    let uniform = MixedProfile::uniform(&g);
    assert_eq!(regret(&g, &uniform).unwrap().max, 0.0);
    assert!(enumerate_pure_nash(&g).unwrap().is_empty());
}

#[test]
fn expected_utility_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let mut b = GameBuilder::with_strategy_count(5);
        b.add_type(4, (0..5).collect());
        for d in 0..5 {
            for s in 0..5 {
                if rng.gen_bool(0.4) {
                    b.add_edge(s, d);
                }
            }
        }
        let g = b.build(|_, _, _| payoff_ratio(rng.gen_range(0..100), 100)).unwrap();
        let profile = MixedProfile::new(
            (0..4)
                .map(|_| {
                    let w: Vec<f64> = (0..5).map(|_| rng.gen()).collect();
                    let t: f64 = w.iter().sum();
                    w.iter().map(|x| x / t).collect()
                })
                .collect(),
        );
        for a in 0..4 {
            for s in 0..5 {
                let fast = expected_utility(&g, &profile, a, s).unwrap();
                let slow = brute_force_expected_utility(&g, &profile, a, s).unwrap();
                assert!((fast - slow).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn ptas_on_anti_coordination_agrees_with_grid_search() {
    let g = anti_coordination();
    let sol = ptas_solve(&g, 0.5, GridMode::Theoretical).unwrap();
    assert!(sol.regret <= 0.5);
    let tsp = &sol.profile;
    assert!((tsp.vectors[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mixed = expand_profile(tsp, &g).unwrap();
    assert!(is_eps_nash(&g, &mixed, 0.5).unwrap());
    // The grid equilibria at a finer step include points near (1/2, 1/2).
    let found = grid_search_type_symmetric(&g, 0.1, 0.3).unwrap();
    assert!(found.iter().any(|p| (p.vectors[0][0] - 0.5).abs() < 1e-12));
    // The solver's output, rounded to the search grid, is at or next to a grid
    // equilibrium for the same eps.
    let same_eps = grid_search_type_symmetric(&g, 0.1, 0.5).unwrap();
    let rounded = round_profile_to_grid(tsp, 0.1).unwrap();
    let near = same_eps.iter().any(|p| (p.vectors[0][0] - rounded.vectors[0][0]).abs() <= 0.1 + 1e-12);
    assert!(near);
}

#[test]
fn single_strategy_game_solves_to_the_pure_profile() {
    let mut b = GameBuilder::with_strategy_count(1);
    b.add_type(3, vec![0]).add_edge(0, 0);
    let g = b.build(|_, _, c| payoff_ratio(i64::from(c[0]), 3)).unwrap();
    let sol = ptas_solve(&g, 0.2, GridMode::Theoretical).unwrap();
    assert_eq!(sol.profile, TypeSymmetricProfile::new(vec![vec![1.0]]));
    assert_eq!(sol.regret, 0.0);
}

#[test]
fn binomial_examples() {
    assert_eq!(binomial_tv_distance(5, 0.3, 0.0).unwrap(), 0.0);
    assert!((binomial_tv_distance(1, 0.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
}
