//! Element hashing into `k` distinct filter positions.
//!
//! One keyed SipHash-1-3 128-bit digest of the element bytes is split into
//! `(h1, h2)`. Candidate `i` is `h1 + i*h2 + (i^3 - i)/6 (mod m)` (enhanced
//! double hashing). A candidate that repeats an earlier index is stepped
//! forward by one position, modulo `m`, until it lands on an unused slot, so
//! every digest holds exactly `k` distinct indices.

use std::collections::HashSet;
use std::hash::Hasher;

use siphasher::sip128::{Hasher128, SipHasher13};

use super::FilterParams;

// Second SipHash key word. The first is the filter seed.
const KEY_TWEAK: u64 = 0x6162_665f_6469_6765;

// Linear scans beat hashing for the usual small k.
const LINEAR_SCAN_MAX_K: usize = 64;

/// The `k` distinct positions an element maps to, in generation order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementDigest {
    indices: Vec<usize>,
}

impl ElementDigest {
    /// Wrap an explicit index list. Used by tests and oracles that want to
    /// place elements by hand; callers are responsible for distinctness.
    pub fn from_indices(indices: Vec<usize>) -> Self {
        ElementDigest { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// True when the digest has exactly `k` distinct in-range indices.
    pub fn fits(&self, params: &FilterParams) -> bool {
        self.indices.len() == params.k() && self.indices.iter().all(|&i| i < params.m())
    }
}

/// Hash `element` into `params.k()` pairwise-distinct indices in `[0, m)`.
pub fn digest(element: &[u8], params: &FilterParams) -> ElementDigest {
    let m = params.m() as u128;
    let k = params.k();

    let mut hasher = SipHasher13::new_with_keys(params.seed(), KEY_TWEAK);
    hasher.write(element);
    let h = hasher.finish128();

    // x_i = h1 + i*h2 + (i^3 - i)/6, advanced incrementally:
    // x_{i+1} = x_i + y_i, y_{i+1} = y_i + (i + 1), y_0 = h2.
    let mut x = h.h1 as u128 % m;
    let mut y = h.h2 as u128 % m;

    let mut indices = Vec::with_capacity(k);
    let mut seen: Option<HashSet<usize>> = (k > LINEAR_SCAN_MAX_K).then(|| HashSet::with_capacity(k));

    for i in 0..k {
        let mut candidate = x as usize;
        loop {
            let taken = match &seen {
                Some(set) => set.contains(&candidate),
                None => indices.contains(&candidate),
            };
            if !taken {
                break;
            }
            candidate = if candidate + 1 == params.m() { 0 } else { candidate + 1 };
        }
        indices.push(candidate);
        if let Some(set) = seen.as_mut() {
            set.insert(candidate);
        }

        x = (x + y) % m;
        y = (y + (i as u128 + 1)) % m;
    }

    ElementDigest { indices }
}
