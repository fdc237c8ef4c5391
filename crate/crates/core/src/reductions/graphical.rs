use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{count_in, payoff, ActionGraphGame, GameBuilder};

/// A binary-action graphical game: every player picks `f` (`false`) or `t`
/// (`true`) and is paid from a table over its own choice and its neighbors'.
///
/// `payoffs[i]` has `2^(d+1)` entries for a player of degree `d`, indexed by
/// the bits `own, choice of neighbor 0, ..., choice of neighbor d-1` (most
/// significant first, neighbors ascending, `t` = 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicalGame {
    players: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    payoffs: Vec<Vec<u8>>,
}

impl GraphicalGame {
    /// Checks degree at most 3, payoffs in `{0, 1, 2}` and table sizes.
    /// Edges are undirected; they are stored as ascending pairs.
    pub fn new(players: usize, edges: Vec<(usize, usize)>, payoffs: Vec<Vec<u8>>) -> Result<Self> {
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= players || b >= players {
                return Err(Error::InvalidReduction(format!("edge ({a}, {b}) names a missing player")));
            }
            if a == b {
                return Err(Error::InvalidReduction(format!("self edge on player {a}")));
            }
            let e = (a.min(b), a.max(b));
            if norm.contains(&e) {
                return Err(Error::InvalidReduction(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            norm.push(e);
        }
        norm.sort_unstable();
        let mut neighbors = vec![Vec::new(); players];
        for &(a, b) in &norm {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        if payoffs.len() != players {
            return Err(Error::InvalidReduction(format!("{} payoff tables for {players} players", payoffs.len())));
        }
        for (i, table) in payoffs.iter().enumerate() {
            let d = neighbors[i].len();
            if d > 3 {
                return Err(Error::InvalidReduction(format!("player {i} has degree {d}")));
            }
            if table.len() != 2 << d {
                return Err(Error::InvalidReduction(format!(
                    "player {i} needs {} payoffs, got {}",
                    2 << d,
                    table.len()
                )));
            }
            if table.iter().any(|&u| u > 2) {
                return Err(Error::InvalidReduction(format!("player {i} has a payoff outside {{0, 1, 2}}")));
            }
        }
        Ok(GraphicalGame { players, edges: norm, neighbors, payoffs })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn table(&self, i: usize) -> &[u8] {
        &self.payoffs[i]
    }

    /// Payoff of player `i` choosing `own` against `choices` (one per neighbor).
    pub fn payoff(&self, i: usize, own: bool, choices: &[bool]) -> u8 {
        let idx = choices.iter().fold(usize::from(own), |acc, &c| acc << 1 | usize::from(c));
        self.payoffs[i][idx]
    }

    /// Expected payoff of `i` choosing `own` when every player `j` picks `f`
    /// with probability `p_f[j]`.
    pub fn expected_payoff(&self, i: usize, own: bool, p_f: &[f64]) -> f64 {
        let nb = &self.neighbors[i];
        let mut total = 0.0;
        let mut choices = vec![false; nb.len()];
        for mask in 0..1usize << nb.len() {
            let mut w = 1.0;
            for (k, &j) in nb.iter().enumerate() {
                choices[k] = mask >> (nb.len() - 1 - k) & 1 == 1;
                w *= if choices[k] { 1.0 - p_f[j] } else { p_f[j] };
            }
            total += w * f64::from(self.payoff(i, own, &choices));
        }
        total
    }

    /// Best-response regret of every player.
    pub fn regret(&self, p_f: &[f64]) -> Result<Vec<f64>> {
        if p_f.len() != self.players || p_f.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidProfile(format!("need {} probabilities in [0, 1]", self.players)));
        }
        Ok((0..self.players)
            .map(|i| {
                let f = self.expected_payoff(i, false, p_f);
                let t = self.expected_payoff(i, true, p_f);
                f.max(t) - (p_f[i] * f + (1.0 - p_f[i]) * t)
            })
            .collect())
    }

    /// All pure equilibria, player 0 most significant, `f` before `t`.
    pub fn pure_nash(&self) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        let mut choice = vec![false; self.players];
        let mut buf = Vec::new();
        for mask in 0..1u64 << self.players {
            for (i, c) in choice.iter_mut().enumerate() {
                *c = mask >> (self.players - 1 - i) & 1 == 1;
            }
            let stable = (0..self.players).all(|i| {
                buf.clear();
                buf.extend(self.neighbors[i].iter().map(|&j| choice[j]));
                self.payoff(i, choice[i], &buf) >= self.payoff(i, !choice[i], &buf)
            });
            if stable {
                out.push(choice.clone());
            }
        }
        out
    }
}

/// One agent per player with strategies `f_i = 2i`, `t_i = 2i + 1`; every
/// edge of `h` becomes `f_i <-> f_j` and `t_i <-> t_j`. The payoff of `f_i`
/// reads neighbor `j` as `f` exactly when `f_j` is occupied, and the payoff
/// of `t_i` reads it as `t` exactly when `t_j` is occupied.
pub fn graphical_to_agg(h: &GraphicalGame) -> Result<ActionGraphGame> {
    let mut b = GameBuilder::new((0..h.players).flat_map(|i| [format!("f{i}"), format!("t{i}")]).collect());
    for i in 0..h.players {
        b.add_type(1, vec![2 * i, 2 * i + 1]);
    }
    for &(i, j) in &h.edges {
        b.add_edge(2 * i, 2 * j).add_edge(2 * j, 2 * i);
        b.add_edge(2 * i + 1, 2 * j + 1).add_edge(2 * j + 1, 2 * i + 1);
    }
    b.build(|s, scope, counts| {
        let i = s / 2;
        let own = s % 2 == 1;
        let choices: Vec<bool> = h.neighbors[i]
            .iter()
            .map(|&j| {
                if own {
                    count_in(scope, counts, 2 * j + 1) > 0
                } else {
                    count_in(scope, counts, 2 * j) == 0
                }
            })
            .collect();
        payoff(i64::from(h.payoff(i, own, &choices)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expected_utility::regret;
    use crate::oracle::enumerate_pure_nash;
    use crate::profile::MixedProfile;
    use crate::validate::validate;
    use rand::{Rng, SeedableRng};

    fn random_h(rng: &mut impl Rng, players: usize) -> GraphicalGame {
        let mut edges = Vec::new();
        let mut deg = vec![0; players];
        for a in 0..players {
            for b in a + 1..players {
                if deg[a] < 3 && deg[b] < 3 && rng.gen_bool(0.6) {
                    edges.push((a, b));
                    deg[a] += 1;
                    deg[b] += 1;
                }
            }
        }
        let payoffs = (0..players).map(|i| (0..2 << deg[i]).map(|_| rng.gen_range(0..3)).collect()).collect();
        GraphicalGame::new(players, edges, payoffs).unwrap()
    }

    #[test]
    fn validation() {
        assert!(GraphicalGame::new(1, vec![], vec![vec![0, 1]]).is_ok());
        assert!(GraphicalGame::new(1, vec![], vec![vec![0, 3]]).is_err());
        assert!(GraphicalGame::new(2, vec![(0, 1)], vec![vec![0, 1], vec![0; 4]]).is_err());
        assert!(GraphicalGame::new(2, vec![(0, 1), (1, 0)], vec![vec![0; 4]; 2]).is_err());
        let star = GraphicalGame::new(5, vec![(0, 1), (0, 2), (0, 3), (0, 4)], vec![vec![0; 32], vec![0; 4], vec![0; 4], vec![0; 4], vec![0; 4]]);
        assert!(star.is_err());
    }

    #[test]
    fn single_player_is_constant() {
        let h = GraphicalGame::new(1, vec![], vec![vec![2, 1]]).unwrap();
        let a = graphical_to_agg(&h).unwrap();
        assert!(validate(&a).is_valid());
        assert_eq!(a.agent_count(), 1);
        assert_eq!(a.utility(0, &[]), Some(&payoff(2)));
        assert_eq!(a.utility(1, &[]), Some(&payoff(1)));
    }

    #[test]
    fn pure_equilibria_correspond() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let players = rng.gen_range(1..4);
            let h = random_h(&mut rng, players);
            let a = graphical_to_agg(&h).unwrap();
            assert!(validate(&a).is_valid());
            let from_h: Vec<Vec<usize>> = h
                .pure_nash()
                .iter()
                .map(|c| c.iter().enumerate().map(|(i, &t)| 2 * i + usize::from(t)).collect())
                .collect();
            assert_eq!(enumerate_pure_nash(&a).unwrap(), from_h);
        }
    }

    #[test]
    fn mixed_regrets_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let players = rng.gen_range(1..5);
            let h = random_h(&mut rng, players);
            let a = graphical_to_agg(&h).unwrap();
            let p: Vec<f64> = (0..players).map(|_| rng.gen_range(0.0..1.0)).collect();
            let profile = MixedProfile::new(p.iter().map(|&x| vec![x, 1.0 - x]).collect());
            let ra = regret(&a, &profile).unwrap();
            let rh = h.regret(&p).unwrap();
            for (x, y) in ra.per_agent.iter().zip(&rh) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
