use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mixes a master seed with a counter (splitmix64), so per-cell streams are
/// independent yet reproducible.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Percentile bootstrap interval for the proportion of `true` values.
pub fn bootstrap_ci(observations: &[bool], resamples: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    if observations.is_empty() {
        return Err(Error::Validation("bootstrap needs at least one observation".into()));
    }
    if resamples < 100 {
        return Err(Error::Validation(format!("need at least 100 resamples, got {resamples}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Validation(format!("confidence level {level} outside (0, 1)")));
    }
    let n = observations.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let hits = (0..n).filter(|_| observations[rng.random_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let lo = ((alpha / 2.0) * resamples as f64).floor() as usize;
    let hi = (((1.0 - alpha / 2.0) * resamples as f64).ceil() as usize).saturating_sub(1);
    Ok((stats[lo.min(resamples - 1)], stats[hi.min(resamples - 1)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_inputs() {
        assert_eq!(bootstrap_ci(&[true; 30], 200, 0.95, 1).unwrap(), (1.0, 1.0));
        assert_eq!(bootstrap_ci(&[false; 5], 200, 0.95, 1).unwrap(), (0.0, 0.0));
        assert!(bootstrap_ci(&[], 200, 0.95, 1).is_err());
        assert!(bootstrap_ci(&[true], 10, 0.95, 1).is_err());
    }

    #[test]
    fn seeds_differ_per_counter() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
