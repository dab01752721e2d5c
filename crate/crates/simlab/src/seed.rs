//! Per-realization seeding and deterministic parallel maps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{SimError, SimResult};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` derived from `base`.
pub fn split(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

pub fn realization_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split(base, index))
}

/// Maps `0..n` on a pool of `threads` workers (0 = all cores); results come
/// back in index order whatever the schedule.
pub fn par_map<T, F>(threads: usize, n: usize, f: F) -> SimResult<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}
