use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{AbfView, CountingFilter, ElementDigest};

/// `hits / total`, kept as counts so two code paths can be compared exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Ratio {
    pub hits: u64,
    pub total: u64,
}

impl Ratio {
    /// `None` for `0 / 0`.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.hits as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmpiricalRates {
    pub tpr: Ratio,
    /// `0 / 0` when there are no absent elements.
    pub fpr: Ratio,
}

impl EmpiricalRates {
    pub fn tpr(&self) -> f64 {
        self.tpr.value().expect("stored set is never empty")
    }

    pub fn fpr(&self) -> Option<f64> {
        self.fpr.value()
    }
}

/// Count accepted stored and absent digests under `view`.
pub fn measure_view(view: &AbfView, stored: &[ElementDigest], absent: &[ElementDigest]) -> Result<EmpiricalRates> {
    if stored.is_empty() {
        return Err(Error::EmptyStoredSet);
    }
    let accepted = |ds: &[ElementDigest]| Ratio {
        hits: ds.iter().filter(|d| view.query(d)).count() as u64,
        total: ds.len() as u64,
    };
    Ok(EmpiricalRates { tpr: accepted(stored), fpr: accepted(absent) })
}

/// Empirical TPR/FPR of `filter` binarized at `theta` with decision threshold `t`.
/// `stored` and `absent` must be disjoint.
pub fn measure_empirical_rates(
    filter: &CountingFilter,
    stored: &[ElementDigest],
    absent: &[ElementDigest],
    theta: u32,
    t: usize,
) -> Result<EmpiricalRates> {
    if stored.is_empty() {
        return Err(Error::EmptyStoredSet);
    }
    measure_view(&filter.binarize(theta, t)?, stored, absent)
}

/// Dot-product histogram (`k + 1` bins) of `digests` against `view`.
pub fn dot_histogram(view: &AbfView, digests: &[ElementDigest]) -> Vec<u64> {
    let mut hist = vec![0u64; view.params().k() + 1];
    for d in digests {
        hist[view.dot(d)] += 1;
    }
    hist
}

/// Retouched Bloom filter: clear `round(erase_fraction * ones)` uniformly
/// chosen set bits of `view` (normally a `theta = 0` view with `T = k`).
pub fn retouched_bf(view: &AbfView, erase_fraction: f64, rng_seed: u64) -> Result<AbfView> {
    if !(0.0..=1.0).contains(&erase_fraction) {
        return Err(Error::InvalidProbability(erase_fraction));
    }
    let ones = view.ones();
    let erase = (erase_fraction * ones.len() as f64).round() as usize;
    if erase == 0 {
        return Ok(view.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let picked: Vec<usize> = index::sample(&mut rng, ones.len(), erase).into_iter().map(|i| ones[i]).collect();
    Ok(view.with_cleared(&picked))
}

/// Model of the retouched filter's rates. With `S = m * P1` set bits and
/// `e = round(f * S)` of them cleared, a query whose `k` positions are all
/// set survives with probability `C(S - k, e) / C(S, e)`, approximated as
/// `(1 - e/S)^k`. Returns `(tpr, fpr)` given the unretouched filter's FPR.
pub fn retouched_rates_model(m: u64, k: u64, one_prob: f64, sbf_fpr: f64, erase_fraction: f64) -> (f64, f64) {
    let set = m as f64 * one_prob;
    if set <= 0.0 {
        return (1.0, sbf_fpr);
    }
    let erased = (erase_fraction * set).round();
    let survive = (1.0 - (erased / set).min(1.0)).powi(k as i32);
    (survive, sbf_fpr * survive)
}
