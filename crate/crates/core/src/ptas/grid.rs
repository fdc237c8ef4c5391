use alloc::format;
use alloc::vec::Vec;

use num_traits::float::FloatCore;

use crate::error::{Error, Result};

/// Probability and target-value discretization.
///
/// Probabilities are integer multiples of `delta = 1/units`; target values
/// are `0, eps/2, eps, ...` capped by `1`, which is always included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    eps: f64,
    delta: f64,
    units: u32,
    values: Vec<f64>,
}

impl GridSpec {
    /// Grid for target `eps` with probability step at most `delta`
    /// (rounded down to `1/ceil(1/delta)`).
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
        }
        let u = FloatCore::ceil(1.0 / delta - 1e-9);
        if u > 1e6 {
            return Err(Error::InvalidParameter(format!("delta {delta} is too fine")));
        }
        let units = u as u32;
        let half = eps / 2.0;
        let mut values = Vec::new();
        let mut i = 0u32;
        loop {
            let v = f64::from(i) * half;
            if v > 1.0 + 1e-12 {
                break;
            }
            values.push(v.min(1.0));
            i += 1;
        }
        if *values.last().unwrap() < 1.0 - 1e-12 {
            values.push(1.0);
        }
        Ok(GridSpec { eps, delta: 1.0 / f64::from(units), units, values })
    }

    /// `delta = eps / (2 d n)`.
    pub fn theoretical(eps: f64, degree: usize, n: u32) -> Result<Self> {
        Self::new(eps, eps / (2.0 * degree.max(1) as f64 * f64::from(n.max(1))))
    }

    /// `delta = eps / (8 d n)`, fine enough for the completeness guarantee.
    pub fn guaranteed(eps: f64, degree: usize, n: u32) -> Result<Self> {
        Self::new(eps, eps / (8.0 * degree.max(1) as f64 * f64::from(n.max(1))))
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `1/delta`.
    pub fn units(&self) -> u32 {
        self.units
    }

    /// The target-value grid `V`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The probability grid `{0, delta, .., 1}`.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.units).map(move |i| self.prob(i))
    }

    pub fn prob(&self, units: u32) -> f64 {
        f64::from(units) / f64::from(self.units)
    }
}
