//! Seeded observed/hidden splits and derived per-unit seeds.

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Independent seed for unit `index` of a `domain` (splits, model inits, ...)
/// under `master`. Counter-based, so it does not depend on scheduling.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng.next_u64()
}

/// Number of observed entries: `round(fraction · n)`.
pub fn observed_count(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    let count = (fraction * n as f64).round() as usize;
    if count == 0 {
        return Err(invalid(format!("fraction {fraction} of {n} observes nothing")));
    }
    if count >= n {
        return Err(invalid(format!("fraction {fraction} of {n} hides nothing")));
    }
    Ok(count)
}

/// `n_splits` observed masks, each selecting `round(fraction · n)` indices
/// uniformly without replacement. Split `i` depends only on
/// `(master_seed, i)`.
pub fn split_generator(n: usize, fraction: f64, n_splits: usize, master_seed: u64) -> Result<Vec<Vec<bool>>> {
    let count = observed_count(n, fraction)?;
    Ok((0..n_splits)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(i as u64);
            let mut mask = vec![false; n];
            for idx in sample(&mut rng, n, count) {
                mask[idx] = true;
            }
            mask
        })
        .collect())
}
