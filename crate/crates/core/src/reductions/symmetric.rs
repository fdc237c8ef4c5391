use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::config::config_count;
use crate::error::{Error, Result};
use crate::game::{count_in, payoff, ActionGraphGame, GameBuilder, Payoff};
use crate::StrategyId;
use crate::profile::MixedProfile;

use super::graphical::GraphicalGame;

/// Bonus paid on a sparsely played pair.
const BONUS: i64 = 100;

/// `c = ceil(64 / eps^2) + 1`, computed exactly from the binary value of `eps`.
pub fn agents_per_pair(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let e = BigRational::from_float(eps).expect("finite");
    let bound = BigRational::from_integer(BigInt::from(64)) / (&e * &e);
    let c: BigInt = bound.ceil().to_integer() + 1;
    c.to_u32().ok_or_else(|| Error::InvalidParameter(format!("eps {eps} is too small")))
}

fn symmetric_builder(h: &GraphicalGame, c: u32) -> Result<GameBuilder> {
    let agents = u32::try_from(3 * u64::from(c) * h.players() as u64)
        .map_err(|_| Error::InvalidParameter("too many agents".into()))?;
    let mut b = GameBuilder::new((0..h.players()).flat_map(|i| [format!("f{i}"), format!("t{i}")]).collect());
    b.add_type(agents, (0..2 * h.players()).collect());
    for &(i, j) in h.edges() {
        for (x, y) in [(i, j), (j, i)] {
            b.add_edge(2 * x, 2 * y).add_edge(2 * x, 2 * y + 1);
            b.add_edge(2 * x + 1, 2 * y).add_edge(2 * x + 1, 2 * y + 1);
        }
    }
    for i in 0..h.players() {
        let (f, t) = (2 * i, 2 * i + 1);
        b.add_edge(f, t).add_edge(t, f).add_edge(f, f).add_edge(t, t);
    }
    Ok(b)
}

/// Number of utility entries [`graphical_to_symmetric_agg`] would store:
/// `sum_i 2 * C(N + 2 + 2 d_i, 2 + 2 d_i)` with `N = 3 c n` agents.
pub fn symmetric_table_entries(h: &GraphicalGame, eps: f64) -> Result<u128> {
    let c = agents_per_pair(eps)?;
    let agents = u32::try_from(3 * u64::from(c) * h.players() as u64)
        .map_err(|_| Error::InvalidParameter("too many agents".into()))?;
    Ok((0..h.players())
        .map(|i| config_count(2 + 2 * h.neighbors(i).len(), agents).map_or(u128::MAX, |x| x.saturating_mul(2)))
        .fold(0u128, u128::saturating_add))
}

/// One type of `3 c n` agents over `f_0, t_0, ..., f_{n-1}, t_{n-1}`.
/// Player `j` of `h` is read as `f` when `D(f_j) >= D(t_j)`; strategies of
/// pair `i` pay `h`'s payoff for player `i` on those readings, plus 100 when
/// at most `c` agents sit on the pair.
///
/// Fails with [`Error::GuardExceeded`] when the tables would hold more than
/// `entry_limit` entries.
pub fn graphical_to_symmetric_agg_with_limit(h: &GraphicalGame, eps: f64, entry_limit: u128) -> Result<ActionGraphGame> {
    let c = agents_per_pair(eps)?;
    let mut b = symmetric_builder(h, c)?;
    b.entry_limit(entry_limit);
    b.build(|s, scope, counts| pair_payoff(h, c, s, scope, counts))
}

fn pair_payoff(h: &GraphicalGame, c: u32, s: StrategyId, scope: &[StrategyId], counts: &[u32]) -> Payoff {
    let i = s / 2;
    let d = |x| count_in(scope, counts, x);
    let choices: Vec<bool> = h.neighbors(i).iter().map(|&j| d(2 * j) < d(2 * j + 1)).collect();
    let mut u = i64::from(h.payoff(i, s % 2 == 1, &choices));
    if d(2 * i) + d(2 * i + 1) <= c {
        u += BONUS;
    }
    payoff(u)
}

pub fn graphical_to_symmetric_agg(h: &GraphicalGame, eps: f64) -> Result<ActionGraphGame> {
    graphical_to_symmetric_agg_with_limit(h, eps, GameBuilder::DEFAULT_ENTRY_LIMIT)
}

/// `Pr(D(f_i) >= D(t_i))` for every player `i` of `h` under a profile of the
/// symmetric game (vectors over `f_0, t_0, ..., f_{n-1}, t_{n-1}`), by a
/// dynamic program over the difference `D(f_i) - D(t_i)`.
pub fn phi_map_profile(profile: &MixedProfile, h: &GraphicalGame) -> Result<Vec<f64>> {
    let width = 2 * h.players();
    for (a, v) in profile.vectors.iter().enumerate() {
        if v.len() != width {
            return Err(Error::InvalidProfile(format!("agent {a} has {} entries, expected {width}", v.len())));
        }
    }
    let agents = profile.vectors.len();
    let mut out = Vec::with_capacity(h.players());
    // Index k stands for difference k - agents.
    let mut cur = vec![0.0; 2 * agents + 1];
    let mut next = vec![0.0; 2 * agents + 1];
    for i in 0..h.players() {
        cur.iter_mut().for_each(|x| *x = 0.0);
        cur[agents] = 1.0;
        for v in &profile.vectors {
            let (pf, pt) = (v[2 * i], v[2 * i + 1]);
            let rest = 1.0 - pf - pt;
            next.iter_mut().for_each(|x| *x = 0.0);
            for (k, &m) in cur.iter().enumerate() {
                if m.is_zero() {
                    continue;
                }
                next[k] += m * rest;
                if k + 1 < next.len() {
                    next[k + 1] += m * pf;
                }
                if k > 0 {
                    next[k - 1] += m * pt;
                }
            }
            core::mem::swap(&mut cur, &mut next);
        }
        out.push(cur[agents..].iter().sum::<f64>().min(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate;

    fn lonely() -> GraphicalGame {
        GraphicalGame::new(1, vec![], vec![vec![1, 2]]).unwrap()
    }

    #[test]
    fn pair_scale() {
        assert_eq!(agents_per_pair(0.5).unwrap(), 257);
        // 64 / 0.8^2 is just above 100 in binary.
        assert_eq!(agents_per_pair(0.8).unwrap(), 101);
        assert!(agents_per_pair(1.0).is_err());
        assert!(agents_per_pair(0.0).is_err());
    }

    #[test]
    fn bonus_and_ties() {
        let h = lonely();
        let g = graphical_to_symmetric_agg(&h, 0.9).unwrap();
        assert!(validate(&g).is_valid());
        let c = agents_per_pair(0.9).unwrap();
        assert_eq!(g.n(), 3 * c);
        assert_eq!(g.neighbors(0), &[0, 1]);
        assert_eq!(g.utility(0, &[c, 0]), Some(&payoff(101)));
        assert_eq!(g.utility(1, &[c - 1, 1]), Some(&payoff(102)));
        assert_eq!(g.utility(0, &[c, 1]), Some(&payoff(1)));
        assert_eq!(symmetric_table_entries(&h, 0.9).unwrap(), g.utilities().iter().map(|t| t.len() as u128).sum());
    }

    #[test]
    fn neighbor_reading_ties_go_to_f() {
        let h = GraphicalGame::new(2, vec![(0, 1)], vec![vec![0, 1, 2, 0], vec![0; 4]]).unwrap();
        let entries = symmetric_table_entries(&h, 0.9).unwrap();
        assert!(entries > GameBuilder::DEFAULT_ENTRY_LIMIT);
        assert!(matches!(graphical_to_symmetric_agg(&h, 0.9), Err(Error::GuardExceeded { .. })));
        // The table would be too large to build; check the payoff rule itself.
        let scope = [0, 1, 2, 3];
        let c = agents_per_pair(0.9).unwrap();
        // Player 1 tied: read as f, so f_0 pays table[0b00] = 0 (no bonus).
        assert_eq!(pair_payoff(&h, c, 0, &scope, &[c, 1, 3, 3]), payoff(0));
        // Player 1 on t: f_0 pays table[0b01] = 1.
        assert_eq!(pair_payoff(&h, c, 0, &scope, &[c, 1, 2, 3]), payoff(1));
        // t_0 against f: table[0b10] = 2, plus the bonus.
        assert_eq!(pair_payoff(&h, c, 1, &scope, &[1, 1, 3, 2]), payoff(102));
    }

    #[test]
    fn phi_examples() {
        let h = lonely();
        let pure = MixedProfile::new(vec![vec![1.0, 0.0]; 3]);
        assert_eq!(phi_map_profile(&pure, &h).unwrap(), vec![1.0]);
        let uniform = MixedProfile::new(vec![vec![0.5, 0.5]; 2]);
        assert!((phi_map_profile(&uniform, &h).unwrap()[0] - 0.75).abs() < 1e-15);
        let on_t = MixedProfile::new(vec![vec![0.0, 1.0]]);
        assert_eq!(phi_map_profile(&on_t, &h).unwrap(), vec![0.0]);
    }

    #[test]
    fn phi_matches_enumeration() {
        let h = GraphicalGame::new(2, vec![(0, 1)], vec![vec![0; 4]; 2]).unwrap();
        let v = [vec![0.2, 0.3, 0.4, 0.1], vec![0.5, 0.1, 0.1, 0.3], vec![0.0, 0.6, 0.3, 0.1]];
        let profile = MixedProfile::new(v.to_vec());
        let phi = phi_map_profile(&profile, &h).unwrap();
        for i in 0..2 {
            let mut p = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        let w = v[0][a] * v[1][b] * v[2][c];
                        let df = [a, b, c].iter().filter(|&&s| s == 2 * i).count();
                        let dt = [a, b, c].iter().filter(|&&s| s == 2 * i + 1).count();
                        if df >= dt {
                            p += w;
                        }
                    }
                }
            }
            assert!((phi[i] - p).abs() < 1e-12);
        }
    }
}
