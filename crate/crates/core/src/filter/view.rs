use crate::error::{Error, Result};

use super::{CountingFilter, ElementDigest, FilterParams};

/// Immutable binary snapshot `[counter > theta]` of a counting filter,
/// queried with decision threshold `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbfView {
    words: Vec<u64>,
    theta: u32,
    decision_threshold: usize,
    params: FilterParams,
    n_at_snapshot: u64,
}

impl AbfView {
    pub(super) fn from_counters(filter: &CountingFilter, theta: u32, decision_threshold: usize) -> Result<Self> {
        let params = *filter.params();
        check_threshold(decision_threshold, params.k())?;
        let mut words = vec![0u64; params.m().div_ceil(64)];
        for (i, &c) in filter.counters().iter().enumerate() {
            if c > theta {
                words[i >> 6] |= 1 << (i & 63);
            }
        }
        Ok(AbfView { words, theta, decision_threshold, params, n_at_snapshot: filter.n_stored() })
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    pub fn decision_threshold(&self) -> usize {
        self.decision_threshold
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn n_at_snapshot(&self) -> u64 {
        self.n_at_snapshot
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.params.m()).map(|i| self.bit(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions of set bits, ascending.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.params.m()).filter(|&i| self.bit(i)).collect()
    }

    /// Number of the digest's positions whose bit is set.
    #[inline]
    pub fn dot(&self, d: &ElementDigest) -> usize {
        d.indices().iter().filter(|&&i| self.bit(i)).count()
    }

    /// Membership: `dot >= T`.
    #[inline]
    pub fn query(&self, d: &ElementDigest) -> bool {
        self.dot(d) >= self.decision_threshold
    }

    pub fn query_element(&self, element: &[u8]) -> bool {
        self.query(&self.params.digest(element))
    }

    /// Same bits, different decision threshold.
    pub fn with_decision_threshold(&self, decision_threshold: usize) -> Result<Self> {
        check_threshold(decision_threshold, self.params.k())?;
        Ok(AbfView { decision_threshold, ..self.clone() })
    }

    /// Copy with the listed positions cleared.
    pub fn with_cleared(&self, positions: &[usize]) -> Self {
        let mut words = self.words.clone();
        for &i in positions {
            words[i >> 6] &= !(1 << (i & 63));
        }
        AbfView { words, ..self.clone() }
    }
}

fn check_threshold(t: usize, k: usize) -> Result<()> {
    if t > k {
        Err(Error::InvalidThreshold { threshold: t, k })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(ix: &[usize]) -> ElementDigest {
        ElementDigest::from_indices(ix.to_vec())
    }

    /// The toy example from the literature this filter generalizes: m = 20,
    /// four stored elements with three positions each, queried with an
    /// unstored element y.
    fn toy() -> (CountingFilter, Vec<ElementDigest>, ElementDigest) {
        let mut f = CountingFilter::new(FilterParams::new(20, 3, 0).unwrap());
        let xs = vec![d(&[1, 4, 9]), d(&[4, 9, 15]), d(&[1, 9, 12]), d(&[4, 9, 18])];
        for x in &xs {
            f.insert(x).unwrap();
        }
        (f, xs, d(&[1, 12, 15]))
    }

    #[test]
    fn all_zero_filter_gives_zero_bits() {
        let f = CountingFilter::new(FilterParams::new(70, 4, 1).unwrap());
        for theta in [0, 1, 5] {
            let v = f.binarize(theta, 2).unwrap();
            assert_eq!(v.count_ones(), 0);
            assert_eq!(v.dot(&f.digest(b"q")), 0);
        }
    }

    #[test]
    fn theta_zero_is_nonzero_mask() {
        let (f, _, _) = toy();
        let v = f.binarize(0, 3).unwrap();
        let mask: Vec<bool> = f.counters().iter().map(|&c| c > 0).collect();
        assert_eq!(v.bits(), mask);
        assert_eq!(v.ones(), vec![1, 4, 9, 12, 15, 18]);
    }

    #[test]
    fn toy_sbf_false_positive_and_abf_rejection() {
        let (f, xs, y) = toy();
        // Counters: 1->2, 4->3, 9->4, 12->1, 15->1, 18->1.
        let sbf = f.binarize(0, 3).unwrap();
        assert!(xs.iter().all(|x| sbf.query(x)));
        assert!(sbf.query(&y));

        // Theta = 1 keeps 1, 4, 9. Every x keeps >= 2 positions, y only one.
        let abf = f.binarize(1, 2).unwrap();
        assert!(xs.iter().all(|x| abf.dot(x) >= 2));
        assert_eq!(abf.dot(&y), 1);
        assert!(xs.iter().all(|x| abf.query(x)));
        assert!(!abf.query(&y));

        // Theta = 3 keeps only position 9: no T >= 2 accepts every x while
        // rejecting y.
        let over = f.binarize(3, 1).unwrap();
        assert_eq!(over.ones(), vec![9]);
        assert!(xs.iter().all(|x| over.dot(x) == 1));
    }

    #[test]
    fn counters_ramp_threshold_two() {
        let mut f = CountingFilter::new(FilterParams::new(6, 1, 0).unwrap());
        for (i, reps) in [0usize, 1, 2, 3, 4, 5].iter().enumerate() {
            for _ in 0..*reps {
                f.insert(&d(&[i])).unwrap();
            }
        }
        let v = f.binarize(2, 1).unwrap();
        assert_eq!(v.bits(), vec![false, false, false, true, true, true]);
    }

    #[test]
    fn stored_element_dot_is_k_at_theta_zero() {
        let p = FilterParams::new(1000, 10, 9).unwrap();
        let mut f = CountingFilter::new(p);
        let ds: Vec<_> = (0u32..80).map(|e| p.digest(&e.to_le_bytes())).collect();
        for x in &ds {
            f.insert(x).unwrap();
        }
        let v = f.binarize(0, 10).unwrap();
        assert!(ds.iter().all(|x| v.dot(x) == 10 && v.query(x)));
    }

    #[test]
    fn zero_threshold_accepts_everything() {
        let (f, _, y) = toy();
        let v = f.binarize(3, 0).unwrap();
        assert!(v.query(&y));
        assert!(v.query(&d(&[0, 2, 3])));
    }

    #[test]
    fn threshold_above_k_rejected() {
        let (f, _, _) = toy();
        assert_eq!(f.binarize(0, 4), Err(Error::InvalidThreshold { threshold: 4, k: 3 }));
        let v = f.binarize(0, 3).unwrap();
        assert!(v.with_decision_threshold(4).is_err());
        assert_eq!(v.with_decision_threshold(1).unwrap().decision_threshold(), 1);
    }

    #[test]
    fn snapshot_is_detached_from_filter() {
        let (mut f, _, y) = toy();
        let v = f.binarize(0, 3).unwrap();
        let before = v.clone();
        f.insert(&d(&[0, 2, 3])).unwrap();
        assert_eq!(v, before);
        assert_eq!(v.n_at_snapshot(), 4);
        assert!(v.query(&y));
    }

    #[test]
    fn clearing_bits() {
        let (f, _, _) = toy();
        let v = f.binarize(0, 3).unwrap();
        let cleared = v.with_cleared(&[4, 12]);
        assert_eq!(cleared.ones(), vec![1, 9, 15, 18]);
        assert_eq!(v.count_ones(), 6);
    }
}
