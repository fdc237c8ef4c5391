//! Thread-pool wrappers around the oracles. Work is split into a fixed number
//! of index ranges that does not depend on the thread count, and the pieces
//! are concatenated in range order, so results are identical for any pool.

use agg_core::oracle::{grid_profile_count, grid_search_range, grid_units};
use agg_core::{ActionGraphGame, Error, Result, TypeSymmetricProfile};
use rayon::prelude::*;

const CHUNKS: u128 = 256;

/// Runs `f` on a pool of `threads` workers; 0 means one per core.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
    pool.install(f)
}

/// Every type-symmetric grid profile at step `delta` with regret at most
/// `eps`, in grid order.
pub fn grid_search(game: &ActionGraphGame, delta: f64, eps: f64, guard: u128) -> Result<(u32, Vec<TypeSymmetricProfile>)> {
    let units = grid_units(delta)?;
    let total = grid_profile_count(game, units);
    if total > guard {
        return Err(Error::GuardExceeded { what: "type-symmetric grid profiles", size: total, limit: guard });
    }
    let step = total.div_ceil(CHUNKS).max(1);
    let ranges: Vec<_> = (0..total).step_by(step as usize).map(|a| a..(a + step).min(total)).collect();
    let parts: Vec<Vec<TypeSymmetricProfile>> =
        ranges.into_par_iter().map(|r| grid_search_range(game, units, eps, r)).collect::<Result<_>>()?;
    Ok((units, parts.into_iter().flatten().collect()))
}
