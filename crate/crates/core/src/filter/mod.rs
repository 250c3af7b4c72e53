//! Counting Bloom filter storage and its thresholded binary views.
//!
//! A [`CountingFilter`] keeps one counter per position; every stored element
//! adds one to each of its `k` positions. [`CountingFilter::binarize`] turns
//! the counters into an [`AbfView`]: a bit is set where the counter exceeds
//! the binarization threshold, and a query is accepted when at least the
//! decision threshold of the element's positions are set. Threshold zero with
//! decision threshold `k` is the ordinary Bloom filter.
//!
//! Writers own the `CountingFilter`; readers share `AbfView` snapshots.

mod codec;
mod digest;
mod view;

pub use digest::{digest, ElementDigest};
pub use view::AbfView;

use crate::error::{Error, Result};

/// Default counter saturation bound, `2^16 - 1`.
pub const DEFAULT_COUNTER_MAX: u32 = u16::MAX as u32;

/// Filter geometry and hash key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FilterParams {
    m: usize,
    k: usize,
    seed: u64,
    counter_max: u32,
}

impl FilterParams {
    pub fn new(m: usize, k: usize, seed: u64) -> Result<Self> {
        Self::with_counter_max(m, k, seed, DEFAULT_COUNTER_MAX)
    }

    pub fn with_counter_max(m: usize, k: usize, seed: u64, counter_max: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if k > m {
            return Err(Error::InvalidParams(format!("k = {k} exceeds m = {m}")));
        }
        if u32::try_from(k).is_err() {
            return Err(Error::InvalidParams(format!("k = {k} does not fit in 32 bits")));
        }
        if counter_max == 0 {
            return Err(Error::InvalidParams("counter_max must be at least 1".into()));
        }
        Ok(FilterParams { m, k, seed, counter_max })
    }

    /// Filter length.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Positions per element.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter_max(&self) -> u32 {
        self.counter_max
    }

    /// Same `m`, seed and saturation bound with a different `k`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::with_counter_max(self.m, k, self.seed, self.counter_max)
    }

    pub fn digest(&self, element: &[u8]) -> ElementDigest {
        digest(element, self)
    }
}

/// `m` saturating counters plus the number of stored elements.
///
/// `n_stored` counts insertions minus removals; duplicates are not detected,
/// so inserting the same element twice counts twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingFilter {
    params: FilterParams,
    counters: Vec<u32>,
    n_stored: u64,
}

impl CountingFilter {
    pub fn new(params: FilterParams) -> Self {
        CountingFilter { counters: vec![0; params.m()], params, n_stored: 0 }
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn n_stored(&self) -> u64 {
        self.n_stored
    }

    pub fn digest(&self, element: &[u8]) -> ElementDigest {
        digest(element, &self.params)
    }

    /// Add one to each position of `d`. Fails without touching the filter if
    /// any target counter is saturated.
    pub fn insert(&mut self, d: &ElementDigest) -> Result<()> {
        self.check_digest(d)?;
        let max = self.params.counter_max;
        if let Some(&index) = d.indices().iter().find(|&&i| self.counters[i] >= max) {
            return Err(Error::Overflow { index, counter_max: max });
        }
        for &i in d.indices() {
            self.counters[i] += 1;
        }
        self.n_stored += 1;
        Ok(())
    }

    /// Subtract one from each position of `d`. Fails without touching the
    /// filter if the filter is empty or any target counter is zero.
    pub fn remove(&mut self, d: &ElementDigest) -> Result<()> {
        self.check_digest(d)?;
        if self.n_stored == 0 {
            return Err(Error::Underflow { index: None });
        }
        if let Some(&index) = d.indices().iter().find(|&&i| self.counters[i] == 0) {
            return Err(Error::Underflow { index: Some(index) });
        }
        for &i in d.indices() {
            self.counters[i] -= 1;
        }
        self.n_stored -= 1;
        Ok(())
    }

    pub fn insert_element(&mut self, element: &[u8]) -> Result<()> {
        let d = self.digest(element);
        self.insert(&d)
    }

    pub fn remove_element(&mut self, element: &[u8]) -> Result<()> {
        let d = self.digest(element);
        self.remove(&d)
    }

    /// Snapshot `[counter > theta]` with decision threshold `decision_threshold`.
    pub fn binarize(&self, theta: u32, decision_threshold: usize) -> Result<AbfView> {
        AbfView::from_counters(self, theta, decision_threshold)
    }

    fn check_digest(&self, d: &ElementDigest) -> Result<()> {
        if d.fits(&self.params) {
            Ok(())
        } else {
            Err(Error::DigestMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CountingFilter {
        CountingFilter::new(FilterParams::new(20, 3, 42).unwrap())
    }

    fn d(ix: &[usize]) -> ElementDigest {
        ElementDigest::from_indices(ix.to_vec())
    }

    #[test]
    fn params_validation() {
        assert!(FilterParams::new(10, 0, 0).is_err());
        assert!(FilterParams::new(10, 11, 0).is_err());
        assert!(FilterParams::new(10, 10, 0).is_ok());
        assert!(FilterParams::with_counter_max(10, 2, 0, 0).is_err());
        assert_eq!(FilterParams::new(5, 1, 0).unwrap().counter_max(), 65_535);
    }

    #[test]
    fn single_insert() {
        let mut f = small();
        f.insert(&d(&[2, 7, 11])).unwrap();
        for (i, &c) in f.counters().iter().enumerate() {
            assert_eq!(c, u32::from([2, 7, 11].contains(&i)));
        }
        assert_eq!(f.n_stored(), 1);
    }

    #[test]
    fn duplicate_insert_counts_twice() {
        let mut f = small();
        f.insert(&d(&[2, 7, 11])).unwrap();
        f.insert(&d(&[2, 7, 11])).unwrap();
        assert_eq!(f.counters()[7], 2);
        assert_eq!(f.n_stored(), 2);
    }

    #[test]
    fn insert_then_remove_restores_empty() {
        let mut f = small();
        let x = f.digest(b"x");
        f.insert(&x).unwrap();
        f.remove(&x).unwrap();
        assert_eq!(f, small());
    }

    #[test]
    fn remove_from_empty_underflows() {
        let mut f = small();
        assert_eq!(f.remove(&d(&[0, 1, 2])), Err(Error::Underflow { index: None }));
        assert_eq!(f, small());
    }

    #[test]
    fn remove_absent_positions_is_atomic() {
        let mut f = small();
        f.insert(&d(&[0, 1, 2])).unwrap();
        let before = f.clone();
        assert_eq!(f.remove(&d(&[0, 1, 3])), Err(Error::Underflow { index: Some(3) }));
        assert_eq!(f, before);
    }

    #[test]
    fn overflow_is_atomic() {
        let mut f = CountingFilter::new(FilterParams::with_counter_max(8, 2, 0, 2).unwrap());
        f.insert(&d(&[0, 1])).unwrap();
        f.insert(&d(&[1, 2])).unwrap();
        let before = f.clone();
        assert_eq!(f.insert(&d(&[3, 1])), Err(Error::Overflow { index: 1, counter_max: 2 }));
        assert_eq!(f, before);
    }

    #[test]
    fn digest_mismatch_rejected() {
        let mut f = small();
        assert_eq!(f.insert(&d(&[0, 1])), Err(Error::DigestMismatch));
        assert_eq!(f.insert(&d(&[0, 1, 20])), Err(Error::DigestMismatch));
    }

    #[test]
    fn remove_replays_to_subset() {
        let mut both = small();
        let (x1, x2) = (both.digest(b"one"), both.digest(b"two"));
        both.insert(&x1).unwrap();
        both.insert(&x2).unwrap();
        both.remove(&x1).unwrap();
        let mut only = small();
        only.insert(&x2).unwrap();
        assert_eq!(both, only);
    }

    #[test]
    fn five_hundred_elements_at_reference_scale() {
        let mut f = CountingFilter::new(FilterParams::new(10_000, 100, 123).unwrap());
        for e in 0u64..500 {
            f.insert_element(&e.to_le_bytes()).unwrap();
        }
        let sum: u64 = f.counters().iter().map(|&c| c as u64).sum();
        assert_eq!(sum, 50_000);
        let zeros = f.counters().iter().filter(|&&c| c == 0).count() as f64 / 10_000.0;
        // (1 - 0.01)^500 = 0.006570
        assert!((zeros - 0.006_570).abs() < 0.002, "zero fraction {zeros}");
    }
}
