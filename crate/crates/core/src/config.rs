//! Configurations: count vectors over an ordered strategy subset.
//!
//! A configuration over a scope of `m` strategies with `n` agents is a vector
//! `(c_0, .., c_{m-1})` with `sum c_i <= n`; the remaining agents sit on
//! strategies outside the scope. Configurations are ordered lexicographically
//! and every table in the crate is indexed by the rank in that order.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::StrategyId;

/// Binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Number of count vectors of length `m` with sum at most `n`: `C(n+m, m)`.
pub fn config_count(m: usize, n: u32) -> Option<u128> {
    binomial(n as u64 + m as u64, m as u64)
}

fn count_usize(m: usize, n: u32) -> usize {
    config_count(m, n)
        .and_then(|c| usize::try_from(c).ok())
        .expect("configuration space too large")
}

/// Lexicographic rank of `counts` among vectors of the same length with sum
/// at most `n`. Returns `None` when the sum exceeds `n`.
pub fn rank(counts: &[u32], n: u32) -> Option<usize> {
    let m = counts.len();
    let mut remaining = n as u64;
    let mut idx: u128 = 0;
    for (i, &c) in counts.iter().enumerate() {
        let c = c as u64;
        if c > remaining {
            return None;
        }
        if c > 0 {
            // Vectors that agree on the prefix and have a smaller value here:
            // sum over v < c of C(remaining - v + len, len), by the hockey stick.
            let len = (m - i - 1) as u64;
            let hi = binomial(remaining + len + 1, len + 1)?;
            let lo = binomial(remaining - c + len + 1, len + 1)?;
            idx += hi - lo;
        }
        remaining -= c;
    }
    usize::try_from(idx).ok()
}

/// Inverse of [`rank`]: writes the configuration with the given rank into `out`.
pub fn unrank(mut idx: usize, n: u32, out: &mut [u32]) {
    let m = out.len();
    let mut remaining = n;
    for i in 0..m {
        let len = m - i - 1;
        let mut v = 0;
        loop {
            let block = count_usize(len, remaining - v);
            if idx < block {
                break;
            }
            idx -= block;
            v += 1;
        }
        out[i] = v;
        remaining -= v;
    }
}

/// Advances `counts` to its lexicographic successor among vectors with sum at
/// most `n`. Returns `false` (leaving `counts` untouched) at the last vector.
pub fn next_config(counts: &mut [u32], n: u32) -> bool {
    let m = counts.len();
    if m == 0 {
        return false;
    }
    let sum: u32 = counts.iter().sum();
    if sum < n {
        counts[m - 1] += 1;
        return true;
    }
    let Some(j) = counts.iter().rposition(|&c| c > 0) else {
        return false;
    };
    if j == 0 {
        return false;
    }
    counts[j] = 0;
    counts[j - 1] += 1;
    true
}

/// A configuration over an explicit scope.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub scope: Vec<StrategyId>,
    pub counts: Vec<u32>,
}

impl Configuration {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Count on strategy `s`, or `None` when `s` is outside the scope.
    pub fn count_of(&self, s: StrategyId) -> Option<u32> {
        self.scope.iter().position(|&x| x == s).map(|i| self.counts[i])
    }
}

/// All configurations over `scope` with at most `n` agents, in lexicographic
/// order. The scope order is taken as given.
pub fn enumerate_configurations(scope: &[StrategyId], n: u32) -> Result<Vec<Configuration>> {
    for (i, s) in scope.iter().enumerate() {
        if scope[..i].contains(s) {
            return Err(Error::InvalidScope(alloc::format!("duplicate strategy {s}")));
        }
    }
    let space = ConfigSpace::new(scope.len(), n);
    Ok((0..space.len())
        .map(|i| Configuration { scope: scope.to_vec(), counts: space.get(i).to_vec() })
        .collect())
}

/// Materialized configuration space with successor links, used by the
/// agent-by-agent distribution recursion.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    m: usize,
    n: u32,
    counts: Vec<u32>,
    totals: Vec<u32>,
    succ: Vec<usize>,
    /// `C(r + len + 1, len + 1)` at `len * (n + 1) + r`.
    blocks: Vec<usize>,
}

impl ConfigSpace {
    pub const NONE: usize = usize::MAX;

    pub fn new(m: usize, n: u32) -> Self {
        let len = count_usize(m, n);
        let mut counts = Vec::with_capacity(len * m);
        let mut cur = vec![0u32; m];
        loop {
            counts.extend_from_slice(&cur);
            if !next_config(&mut cur, n) {
                break;
            }
        }
        debug_assert_eq!(counts.len(), len * m);
        let mut succ = vec![Self::NONE; len * m];
        let mut buf = vec![0u32; m];
        for idx in 0..len {
            let c = &counts[idx * m..(idx + 1) * m];
            if c.iter().sum::<u32>() < n {
                for k in 0..m {
                    buf.copy_from_slice(c);
                    buf[k] += 1;
                    succ[idx * m + k] = rank(&buf, n).expect("successor in range");
                }
            }
        }
        let totals = (0..len).map(|idx| counts[idx * m..(idx + 1) * m].iter().sum()).collect();
        let blocks = (0..m)
            .flat_map(|l| (0..=n).map(move |r| count_usize(l + 1, r)))
            .collect();
        ConfigSpace { m, n, counts, totals, succ, blocks }
    }

    pub fn dims(&self) -> usize {
        self.m
    }

    pub fn max_total(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        if self.m == 0 {
            1
        } else {
            self.counts.len() / self.m
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, idx: usize) -> &[u32] {
        &self.counts[idx * self.m..(idx + 1) * self.m]
    }

    /// Rank of the configuration obtained by adding one agent on coordinate `k`.
    pub fn successor(&self, idx: usize, k: usize) -> Option<usize> {
        match self.succ[idx * self.m + k] {
            Self::NONE => None,
            s => Some(s),
        }
    }

    /// Number of agents inside the scope for the configuration at `idx`.
    pub fn total(&self, idx: usize) -> u32 {
        self.totals[idx]
    }

    pub fn rank(&self, counts: &[u32]) -> Option<usize> {
        if counts.len() != self.m {
            return rank(counts, self.n);
        }
        let stride = self.n as usize + 1;
        let mut remaining = self.n as usize;
        let mut idx = 0;
        for (i, &c) in counts.iter().enumerate() {
            let c = c as usize;
            if c > remaining {
                return None;
            }
            if c > 0 {
                let row = &self.blocks[(self.m - i - 1) * stride..];
                idx += row[remaining] - row[remaining - c];
            }
            remaining -= c;
        }
        Some(idx)
    }
}
