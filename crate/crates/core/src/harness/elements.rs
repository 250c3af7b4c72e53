//! Reproducible element streams.
//!
//! Elements are 64-bit values produced by a bijective mix of a counter, so
//! distinct counters always give distinct elements. Stored elements use
//! counters below `2^63`, absent elements counters at or above it, which
//! keeps the two sets disjoint.

const ABSENT_BIT: u64 = 1 << 63;

/// SplitMix64 output function. Bijective on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent seed for sub-stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementStream {
    key: u64,
}

impl ElementStream {
    pub fn new(seed: u64) -> Self {
        ElementStream { key: mix64(seed) }
    }

    /// The `i`-th stored element. `i` must be below `2^63`.
    pub fn stored(&self, i: u64) -> u64 {
        debug_assert!(i < ABSENT_BIT);
        mix64(i ^ self.key)
    }

    /// The `j`-th absent element; never equal to any stored element.
    pub fn absent(&self, j: u64) -> u64 {
        debug_assert!(j < ABSENT_BIT);
        mix64((j | ABSENT_BIT) ^ self.key)
    }

    pub fn stored_bytes(&self, i: u64) -> [u8; 8] {
        self.stored(i).to_le_bytes()
    }

    pub fn absent_bytes(&self, j: u64) -> [u8; 8] {
        self.absent(j).to_le_bytes()
    }
}
