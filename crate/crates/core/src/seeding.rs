//! Keyed deterministic randomness.
//!
//! Every random decision in the crate flows from a user seed through a
//! ChaCha12 stream keyed by SHA-256 over (seed, purpose label, context
//! strings, index). Independent streams for independent work items make
//! results order-independent: the error matrix can evaluate its cells in any
//! order, or in parallel, and still produce identical numbers.
//!
//! The sampling arithmetic (uniform index, weighted choice, unit-interval
//! doubles) is written out here rather than delegated, so the byte-for-byte
//! output contract cannot drift with a dependency's internals.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest as _, Sha256};

/// A ChaCha12 stream keyed by seed, a purpose label, and free-form context.
pub(crate) fn stream(seed: u64, label: &str, context: &[&str], index: u64) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    for part in context {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update(index.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha12Rng::from_seed(key)
}

/// Uniform draw from `0..n` by modulo rejection; `n` must be nonzero.
pub(crate) fn uniform_index(rng: &mut ChaCha12Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    // Reject the tail that would bias the modulo.
    let zone = u64::MAX - u64::MAX % n;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % n) as usize;
        }
    }
}

/// Uniform double in [0, 1) with 53 bits of precision.
pub(crate) fn unit(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draw an index with probability proportional to `weights`.
///
/// Weights must be nonnegative with a positive finite sum; they do not need
/// to sum to one. The scan order makes ties and float edges deterministic.
pub(crate) fn weighted_index(rng: &mut ChaCha12Rng, weights: &[f64]) -> usize {
    debug_assert!(!weights.is_empty());
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0);
    let mut target = unit(rng) * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if target < w {
            return i;
        }
        target -= w;
        last_positive = i;
    }
    // Rounding pushed the target past the last bucket.
    last_positive
}

/// Reservoir update: keep a uniform sample of at most `cap` pushed items.
/// `seen` counts items pushed so far, including this one.
pub(crate) fn reservoir_push<T>(
    reservoir: &mut alloc::vec::Vec<T>,
    cap: usize,
    seen: u64,
    item: T,
    rng: &mut ChaCha12Rng,
) {
    if reservoir.len() < cap {
        reservoir.push(item);
        return;
    }
    let j = uniform_index(rng, seen as usize);
    if j < cap {
        reservoir[j] = item;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_keyed_not_positional() {
        let mut a = stream(7, "x", &["alpha", "beta"], 0);
        let mut b = stream(7, "x", &["alpha", "beta"], 0);
        let mut c = stream(7, "x", &["alphab", "eta"], 0);
        assert_eq!(a.next_u64(), b.next_u64());
        // Length framing keeps adjacent strings from gluing together.
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn uniform_index_covers_range() {
        let mut rng = stream(0, "test", &[], 0);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            seen[uniform_index(&mut rng, 7)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn weighted_index_respects_zero_weights() {
        let mut rng = stream(1, "test", &[], 0);
        for _ in 0..200 {
            let i = weighted_index(&mut rng, &[0.0, 0.5, 0.0, 0.5, 0.0]);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn reservoir_keeps_cap_items() {
        let mut rng = stream(2, "test", &[], 0);
        let mut r = alloc::vec::Vec::new();
        for i in 0..100u64 {
            reservoir_push(&mut r, 10, i + 1, i, &mut rng);
        }
        assert_eq!(r.len(), 10);
        let mut sorted = r.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }
}
