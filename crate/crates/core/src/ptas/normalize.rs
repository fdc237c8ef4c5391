use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::game::{to_f64, ActionGraphGame, Payoff};

/// How payoffs were mapped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffMap {
    /// Payoffs already lay in `[0, 1]`.
    Identity,
    /// `u -> (u - min) / range`.
    Affine { min: Payoff, range: Payoff },
    /// Every payoff equalled `value`; all are mapped to 0.
    Constant { value: Payoff },
}

impl PayoffMap {
    pub fn apply(&self, u: &Payoff) -> Payoff {
        match self {
            PayoffMap::Identity => u.clone(),
            PayoffMap::Affine { min, range } => (u - min) / range,
            PayoffMap::Constant { .. } => BigRational::zero(),
        }
    }

    /// Original payoff units per normalized unit.
    pub fn scale(&self) -> f64 {
        match self {
            PayoffMap::Identity => 1.0,
            PayoffMap::Affine { range, .. } => to_f64(range),
            PayoffMap::Constant { .. } => 0.0,
        }
    }

    /// A regret measured after normalization, in original payoff units.
    pub fn to_original(&self, regret: f64) -> f64 {
        regret * self.scale()
    }
}

/// Maps payoffs affinely into `[0, 1]`; games already inside are returned
/// unchanged.
pub fn normalize_payoffs(game: &ActionGraphGame) -> (ActionGraphGame, PayoffMap) {
    let Some((lo, hi)) = game.payoff_bounds().cloned() else {
        return (game.clone(), PayoffMap::Identity);
    };
    let zero = BigRational::zero();
    let one = BigRational::one();
    if lo >= zero && hi <= one {
        return (game.clone(), PayoffMap::Identity);
    }
    let map = if lo == hi {
        PayoffMap::Constant { value: lo }
    } else {
        let range = &hi - &lo;
        PayoffMap::Affine { min: lo, range }
    };
    (game.map_payoffs(|u| map.apply(u)), map)
}
