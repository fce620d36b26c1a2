//! Portable seeded random stream.
//!
//! The generator is ChaCha8 (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`. Floating-point draws are built from the top
//! 53 bits of `next_u64`, and integer ranges use rejection sampling, so the
//! sequence depends only on the seed and not on the platform or on `rand`'s
//! distribution code.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for one (patient, segmentor) cell of a battery.
    /// Adding patients or segmentors never changes another cell's stream.
    pub fn for_cell(master_seed: u64, patient_id: &str, segmentor_id: &str) -> Self {
        Self::new(derive_seed(master_seed, patient_id, segmentor_id))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.unit();
        if hi <= lo {
            lo
        } else {
            lo + (hi - lo) * u
        }
    }

    /// Uniform integer in `[lo, hi]` (inclusive).
    pub fn uniform_int(&mut self, lo: u32, hi: u32) -> u32 {
        if hi <= lo {
            return lo;
        }
        let span = u64::from(hi - lo) + 1;
        let zone = u64::MAX - (u64::MAX % span);
        loop {
            let v = self.next_u64();
            if v < zone {
                return lo + (v % span) as u32;
            }
        }
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// First 8 bytes (little endian) of SHA-256 over the master seed and the two
/// ids, each id length-prefixed so `("ab", "c")` and `("a", "bc")` differ.
pub fn derive_seed(master_seed: u64, patient_id: &str, segmentor_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    for id in [patient_id, segmentor_id] {
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        let xa: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(SeededRng::new(43).next_u64(), xa[0]);
    }

    #[test]
    fn stream_is_pinned() {
        // Guards against an accidental change of generator or seeding.
        let mut r = SeededRng::new(0);
        let first = r.next_u64();
        let mut again = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(first, again.next_u64());
    }

    #[test]
    fn draws_stay_in_range() {
        let mut r = SeededRng::new(7);
        for _ in 0..10_000 {
            let u = r.uniform(-0.5, 0.5);
            assert!((-0.5..0.5).contains(&u));
            let k = r.uniform_int(1, 5);
            assert!((1..=5).contains(&k));
        }
        assert_eq!(r.uniform(3.0, 3.0), 3.0);
        assert_eq!(r.uniform_int(4, 4), 4);
    }

    #[test]
    fn uniform_int_hits_every_value() {
        let mut r = SeededRng::new(11);
        let mut seen = [0usize; 5];
        for _ in 0..5_000 {
            seen[(r.uniform_int(1, 5) - 1) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800), "{seen:?}");
    }

    #[test]
    fn cell_seeds_are_independent_of_each_other() {
        let a = derive_seed(1, "p1", "s1");
        assert_eq!(a, derive_seed(1, "p1", "s1"));
        assert_ne!(a, derive_seed(1, "p2", "s1"));
        assert_ne!(a, derive_seed(1, "p1", "s2"));
        assert_ne!(a, derive_seed(2, "p1", "s1"));
        assert_ne!(derive_seed(1, "ab", "c"), derive_seed(1, "a", "bc"));
    }
}
