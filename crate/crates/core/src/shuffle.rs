//! Seeded, platform-independent permutations.
//!
//! All randomness in the crate goes through [`shuffled_indices`]. The stream is
//! ChaCha8 keyed by `ChaCha8Rng::seed_from_u64(seed)`; the permutation is a
//! Fisher-Yates pass from the top, drawing each swap index as the high word of
//! the 128-bit product `next_u64() * (i + 1)`. Nothing here depends on the
//! host's word size or on `rand`'s sampling internals, so a seed names the
//! same permutation everywhere.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Returns a permutation of `0..n` determined entirely by `seed`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let bound = (i + 1) as u128;
        let j = ((rng.next_u64() as u128 * bound) >> 64) as usize;
        idx.swap(i, j);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        for n in [0, 1, 2, 17, 100] {
            let mut p = shuffled_indices(n, 9);
            p.sort_unstable();
            assert_eq!(p, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn seed_determines_order() {
        assert_eq!(shuffled_indices(50, 1), shuffled_indices(50, 1));
        assert_ne!(shuffled_indices(50, 1), shuffled_indices(50, 2));
    }
}
