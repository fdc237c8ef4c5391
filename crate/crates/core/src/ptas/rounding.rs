use alloc::vec;
use alloc::vec::Vec;

use num_traits::float::FloatCore;

use crate::error::{Error, Result};
use crate::profile::TypeSymmetricProfile;

/// Values this close to a whole number of units are treated as on the grid.
const SNAP: f64 = 1e-9;

/// Rounds a probability vector to whole units out of `units`, keeping zero
/// entries at zero and every support entry at least one unit. Entries move
/// to an adjacent unit by largest remainder (ties to the lower index).
pub fn round_vector(v: &[f64], units: u32) -> Result<Vec<u32>> {
    let support = v.iter().filter(|&&p| p > 0.0).count();
    if support > units as usize {
        return Err(Error::SupportTooLarge { support, units });
    }
    let u = f64::from(units);
    let scaled: Vec<f64> = v
        .iter()
        .map(|&p| {
            let x = p * u;
            let r = FloatCore::round(x);
            if (x - r).abs() <= SNAP {
                r
            } else {
                x
            }
        })
        .collect();
    let mut q: Vec<u32> = scaled
        .iter()
        .zip(v)
        .map(|(&x, &p)| if p > 0.0 { (FloatCore::floor(x) as u32).max(1) } else { 0 })
        .collect();
    let mut sum: u32 = q.iter().sum();

    if sum < units {
        let mut order: Vec<usize> = (0..v.len()).filter(|&i| v[i] > 0.0 && f64::from(q[i]) < scaled[i]).collect();
        order.sort_by(|&a, &b| {
            let ra = scaled[a] - f64::from(q[a]);
            let rb = scaled[b] - f64::from(q[b]);
            rb.partial_cmp(&ra).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
        });
        for i in order {
            if sum == units {
                break;
            }
            q[i] += 1;
            sum += 1;
        }
        // Only reachable through float noise in the input sums.
        let mut i = 0;
        while sum < units {
            if v[i] > 0.0 {
                q[i] += 1;
                sum += 1;
            }
            i = (i + 1) % v.len();
        }
    }
    while sum > units {
        // Take from the entry furthest above its target that can spare a unit.
        let i = (0..v.len())
            .filter(|&i| q[i] > 1)
            .max_by(|&a, &b| {
                let ea = f64::from(q[a]) - scaled[a];
                let eb = f64::from(q[b]) - scaled[b];
                ea.partial_cmp(&eb).unwrap_or(core::cmp::Ordering::Equal).then(b.cmp(&a))
            })
            .expect("support fits in the grid");
        q[i] -= 1;
        sum -= 1;
    }
    Ok(q)
}

/// Grid rounding of a type-symmetric profile with step `delta`
/// (`1/delta` is rounded up to a whole number of units).
pub fn round_profile_to_grid(profile: &TypeSymmetricProfile, delta: f64) -> Result<TypeSymmetricProfile> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("delta must lie in (0, 1], got {delta}")));
    }
    let units = FloatCore::ceil(1.0 / delta - 1e-9) as u32;
    let vectors = profile
        .vectors
        .iter()
        .map(|v| {
            if v.is_empty() {
                return Ok(vec![]);
            }
            Ok(round_vector(v, units)?.into_iter().map(|q| f64::from(q) / f64::from(units)).collect())
        })
        .collect::<Result<_>>()?;
    Ok(TypeSymmetricProfile::new(vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tsp(v: &[f64]) -> TypeSymmetricProfile {
        TypeSymmetricProfile::new(vec![v.to_vec()])
    }

    #[test]
    fn on_grid_is_unchanged() {
        let p = tsp(&[0.25, 0.5, 0.25, 0.0]);
        assert_eq!(round_profile_to_grid(&p, 0.25).unwrap(), p);
        let q = tsp(&[0.3, 0.7]);
        assert_eq!(round_profile_to_grid(&q, 0.1).unwrap(), q);
    }

    #[test]
    fn sum_forces_direction() {
        assert_eq!(round_profile_to_grid(&tsp(&[0.26, 0.74]), 0.25).unwrap(), tsp(&[0.25, 0.75]));
    }

    #[test]
    fn zeros_stay_zero_and_small_entries_survive() {
        let r = round_vector(&[0.01, 0.0, 0.99], 10).unwrap();
        assert_eq!(r, vec![1, 0, 9]);
    }

    #[test]
    fn support_too_large() {
        assert!(matches!(round_vector(&[0.25; 4], 3), Err(Error::SupportTooLarge { support: 4, units: 3 })));
    }

    #[test]
    fn ties_go_to_lower_index() {
        assert_eq!(round_vector(&[0.5, 0.5], 3).unwrap(), vec![2, 1]);
        assert_eq!(round_vector(&[0.125, 0.125, 0.75], 4).unwrap(), vec![1, 1, 2]);
    }

    #[test]
    fn bound_and_sum_on_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let m = rng.gen_range(1..6);
            let raw: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
            let s: f64 = raw.iter().sum();
            if s == 0.0 {
                continue;
            }
            let v: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let units = rng.gen_range(m as u32..40);
            let q = round_vector(&v, units).unwrap();
            assert_eq!(q.iter().sum::<u32>(), units);
            for (p, &x) in v.iter().zip(&q) {
                assert_eq!(*p == 0.0, x == 0);
            }
            // Each entry moves by less than one unit unless the support
            // floor forced a correction.
            let forced = v.iter().filter(|&&p| p > 0.0 && p * f64::from(units) < 1.0).count() > 0;
            if !forced {
                for (p, &x) in v.iter().zip(&q) {
                    assert!((f64::from(x) - p * f64::from(units)).abs() < 1.0 + 1e-9);
                }
            }
        }
    }
}
