//! Closed-form rate model for thresholded counting Bloom filters.
//!
//! A counter is `Binomial(n, k/m)`. Zeroing every counter `<= theta` leaves a
//! fraction `P1` of set bits. The dot product of a stored element with the
//! view is modelled as `Binomial(k, p_x)` with `p_x = dbar_x / k`, that of an
//! absent element as `Binomial(k, P1)`; TPR and FPR are the upper tails of
//! those two laws at the decision threshold `T`.
//!
//! Probability mass terms are evaluated in log space so that large binomial
//! coefficients never overflow.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a single element's hash results may relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionModel {
    /// The `k` indices are always distinct (what [`crate::filter::digest`] produces).
    #[default]
    Distinct,
    /// Each of the `k` hashes lands independently and may repeat.
    WithReplacement,
}

/// Binomial probability mass `C(g, s) p^s (1-p)^(g-s)`; zero for `s > g`.
pub fn binom_pmf(g: u64, p: f64, s: u64) -> Result<f64> {
    check_prob(p)?;
    if s > g {
        return Ok(0.0);
    }
    // Degenerate endpoints: avoid 0 * ln(0).
    if p == 0.0 {
        return Ok(if s == 0 { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if s == g { 1.0 } else { 0.0 });
    }
    Ok(saddle_point_pmf(g, p, s))
}

/// Loader's saddle-point form of the binomial pmf. Unlike the naive
/// `ln C(g, s) + s ln p + ...` sum it never subtracts large logarithms, so
/// relative error stays near machine precision for any `g`.
fn saddle_point_pmf(g: u64, p: f64, s: u64) -> f64 {
    let q = 1.0 - p;
    let (n, x) = (g as f64, s as f64);
    if s == 0 {
        let lc = if p < 0.1 { -deviance(n, n * q) - n * p } else { n * q.ln() };
        return lc.exp();
    }
    if s == g {
        let lc = if q < 0.1 { -deviance(n, n * p) - n * q } else { n * p.ln() };
        return lc.exp();
    }
    let lc =
        stirling_error(g) - stirling_error(s) - stirling_error(g - s) - deviance(x, n * p) - deviance(n - x, n * q);
    let lf = std::f64::consts::TAU.ln() + x.ln() + (-x / n).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln n! - ((n + 1/2) ln n - n + ln sqrt(2 pi))` for `n >= 1`.
fn stirling_error(n: u64) -> f64 {
    const SMALL: [f64; 15] = [
        0.08106146679532726,
        0.0413406959554093,
        0.02767792568499834,
        0.020790672103765093,
        0.016644691189821193,
        0.013876128823070748,
        0.01189670994589177,
        0.010411265261972096,
        0.009255462182712733,
        0.00833056343336287,
        0.007573675487951841,
        0.00694284010720953,
        0.006408994188004207,
        0.0059513701127588475,
        0.005554733551962801,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return SMALL[n as usize - 1];
    }
    let n = n as f64;
    let nn = n * n;
    let series = if n > 500.0 {
        S0 - S1 / nn
    } else if n > 80.0 {
        S0 - (S1 - S2 / nn) / nn
    } else if n > 35.0 {
        S0 - (S1 - (S2 - S3 / nn) / nn) / nn
    } else {
        S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn
    };
    series / n
}

/// `x ln(x / np) + np - x`, summed as a series when `x` is near `np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() >= 0.1 * (x + np) {
        return x * (x / np).ln() + np - x;
    }
    let v = (x - np) / (x + np);
    let mut sum = (x - np) * v;
    let mut term = 2.0 * x * v;
    let v2 = v * v;
    for j in 1.. {
        term *= v2;
        let next = sum + term / (2 * j + 1) as f64;
        if next == sum {
            break;
        }
        sum = next;
    }
    sum
}

/// Probability that a counter holds exactly `v` after `n` insertions, each
/// touching the position with probability `p1`.
pub fn pr_counter(n: u64, p1: f64, v: u64) -> Result<f64> {
    binom_pmf(n, p1, v)
}

/// Probability that a position is still zero after `n` insertions.
pub fn p_empty(m: u64, n: u64, k: u64, model: CollisionModel) -> f64 {
    let (m, n, k) = (m as f64, n as f64, k as f64);
    match model {
        CollisionModel::Distinct => ((-(k / m)).ln_1p() * n).exp(),
        CollisionModel::WithReplacement => ((-(1.0 / m)).ln_1p() * k * n).exp(),
    }
}

/// Expected number of positions whose counter equals `v`.
pub fn expected_count_histogram(m: u64, n: u64, k: u64, v: u64) -> f64 {
    m as f64 * pr_counter(n, position_prob(m, k), v).expect("k <= m keeps k/m a probability")
}

/// `(P0, P1)`: probabilities that a view bit is zero / one at threshold `theta`.
pub fn p_zero_after_threshold(m: u64, n: u64, k: u64, theta: u32) -> (f64, f64) {
    if theta as u64 >= n {
        return (1.0, 0.0);
    }
    let p1 = position_prob(m, k);
    if below_mean(n, p1, theta) {
        let p0 = counter_sum(n, p1, 0..=theta as u64, |_| 1.0).min(1.0);
        (p0, 1.0 - p0)
    } else {
        let one = upper_counter_sum(n, p1, theta as u64 + 1, |_| 1.0).min(1.0);
        (1.0 - one, one)
    }
}

/// Expected dot product between the view and a stored element.
///
/// Equals `k - (m/n) * sum_{v <= theta} v Pr(I = v)`; above the mean counter
/// value the same quantity is taken as `(m/n) * sum_{v > theta} v Pr(I = v)`
/// to avoid cancellation.
pub fn expected_dot_stored(m: u64, n: u64, k: u64, theta: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyFilter);
    }
    if theta as u64 >= n {
        return Ok(0.0);
    }
    let p1 = position_prob(m, k);
    let scale = m as f64 / n as f64;
    let dbar = if below_mean(n, p1, theta) {
        k as f64 - scale * counter_sum(n, p1, 1..=theta as u64, |v| v as f64)
    } else {
        scale * upper_counter_sum(n, p1, theta as u64 + 1, |v| v as f64)
    };
    Ok(dbar.clamp(0.0, k as f64))
}

fn below_mean(n: u64, p1: f64, theta: u32) -> bool {
    (theta as f64) < n as f64 * p1
}

fn counter_sum(n: u64, p1: f64, vs: RangeInclusive<u64>, weight: impl Fn(u64) -> f64) -> f64 {
    vs.map(|v| weight(v) * pr_counter(n, p1, v).unwrap_or(0.0)).sum()
}

/// `sum_{v >= from} weight(v) Pr(I = v)`, stopping once terms past the mode
/// no longer change the sum.
fn upper_counter_sum(n: u64, p1: f64, from: u64, weight: impl Fn(u64) -> f64) -> f64 {
    let mode = ((n + 1) as f64 * p1).floor() as u64;
    let mut sum = 0.0;
    for v in from..=n {
        let term = weight(v) * pr_counter(n, p1, v).unwrap_or(0.0);
        sum += term;
        if v > mode && term <= sum * f64::EPSILON * 1e-3 {
            break;
        }
    }
    sum
}

/// Expected dot product between the view and an absent element, `k * P1`.
pub fn expected_dot_absent(m: u64, n: u64, k: u64, theta: u32) -> f64 {
    k as f64 * p_zero_after_threshold(m, n, k, theta).1
}

/// Per-position success probabilities `(p_x, p_y)` for stored and absent elements.
pub fn success_probs(m: u64, n: u64, k: u64, theta: u32) -> Result<(f64, f64)> {
    let px = expected_dot_stored(m, n, k, theta)? / k as f64;
    let py = p_zero_after_threshold(m, n, k, theta).1;
    Ok((px.clamp(0.0, 1.0), py.clamp(0.0, 1.0)))
}

/// Hash count minimizing the false positive rate of a plain Bloom filter,
/// `(m/n) ln 2` rounded to the nearest integer and at least one.
pub fn optimal_k(m: u64, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::EmptyFilter);
    }
    let k = (m as f64 / n as f64 * std::f64::consts::LN_2).round();
    Ok((k as u64).max(1))
}

/// A parameter point `(m, n, k, theta, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelPoint {
    pub m: u64,
    pub n: u64,
    pub k: u64,
    pub theta: u32,
    pub t: u64,
}

impl ModelPoint {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.m {
            return Err(Error::InvalidParams(format!("need 1 <= k <= m, got k = {}, m = {}", self.k, self.m)));
        }
        if self.t > self.k {
            return Err(Error::InvalidThreshold { threshold: self.t as usize, k: self.k as usize });
        }
        if self.n == 0 {
            return Err(Error::EmptyFilter);
        }
        Ok(())
    }
}

/// Model outputs for one `(m, n, k, theta, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    /// `k/m`, the chance a given element touches a given position.
    pub position_prob: f64,
    /// `P0`, probability a view bit is zero.
    pub zero_prob: f64,
    /// `P1 = 1 - P0`.
    pub one_prob: f64,
    /// `dbar_x`.
    pub mean_dot_stored: f64,
    /// `dbar_y`.
    pub mean_dot_absent: f64,
    /// `p_x`.
    pub stored_hit_prob: f64,
    /// `p_y`.
    pub absent_hit_prob: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub acc: f64,
}

/// Balanced accuracy: mean of TPR and TNR.
pub fn accuracy(tpr: f64, fpr: f64) -> f64 {
    (tpr + (1.0 - fpr)) / 2.0
}

/// TPR and FPR for every decision threshold `0..=k` at a fixed `theta`.
///
/// [`rates`] and the tuner both read from this so that a tuned prediction is
/// bit-for-bit what `rates` reports for the same point.
#[derive(Debug, Clone)]
pub struct ThresholdCurve {
    m: u64,
    n: u64,
    k: u64,
    theta: u32,
    zero_prob: f64,
    mean_dot_stored: f64,
    stored_hit_prob: f64,
    absent_hit_prob: f64,
    tpr: Vec<f64>,
    fpr: Vec<f64>,
}

impl ThresholdCurve {
    pub fn new(m: u64, n: u64, k: u64, theta: u32) -> Result<Self> {
        ModelPoint { m, n, k, theta, t: 0 }.validate()?;
        let (zero_prob, _) = p_zero_after_threshold(m, n, k, theta);
        let mean_dot_stored = expected_dot_stored(m, n, k, theta)?;
        let (stored_hit_prob, absent_hit_prob) = success_probs(m, n, k, theta)?;
        Ok(ThresholdCurve {
            m,
            n,
            k,
            theta,
            zero_prob,
            mean_dot_stored,
            stored_hit_prob,
            absent_hit_prob,
            tpr: upper_tails(k, stored_hit_prob)?,
            fpr: upper_tails(k, absent_hit_prob)?,
        })
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `TPR(T)` for `T` in `0..=k`.
    pub fn tpr(&self) -> &[f64] {
        &self.tpr
    }

    /// `FPR(T)` for `T` in `0..=k`.
    pub fn fpr(&self) -> &[f64] {
        &self.fpr
    }

    pub fn acc(&self, t: u64) -> f64 {
        accuracy(self.tpr[t as usize], self.fpr[t as usize])
    }

    pub fn estimate(&self, t: u64) -> Result<RateEstimate> {
        if t > self.k {
            return Err(Error::InvalidThreshold { threshold: t as usize, k: self.k as usize });
        }
        let (tpr, fpr) = (self.tpr[t as usize], self.fpr[t as usize]);
        Ok(RateEstimate {
            position_prob: position_prob(self.m, self.k),
            zero_prob: self.zero_prob,
            one_prob: 1.0 - self.zero_prob,
            mean_dot_stored: self.mean_dot_stored,
            mean_dot_absent: self.k as f64 * (1.0 - self.zero_prob),
            stored_hit_prob: self.stored_hit_prob,
            absent_hit_prob: self.absent_hit_prob,
            tpr,
            fpr,
            acc: accuracy(tpr, fpr),
        })
    }

    /// Model pmf of the stored-element dot product, `Binomial(k, p_x)`.
    pub fn stored_pmf(&self) -> Vec<f64> {
        pmf_vec(self.k, self.stored_hit_prob)
    }

    /// Model pmf of the absent-element dot product, `Binomial(k, p_y)`.
    pub fn absent_pmf(&self) -> Vec<f64> {
        pmf_vec(self.k, self.absent_hit_prob)
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Full rate estimate at one parameter point.
pub fn rates(point: &ModelPoint) -> Result<RateEstimate> {
    point.validate()?;
    ThresholdCurve::new(point.m, point.n, point.k, point.theta)?.estimate(point.t)
}

fn position_prob(m: u64, k: u64) -> f64 {
    k as f64 / m as f64
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn pmf_vec(k: u64, p: f64) -> Vec<f64> {
    (0..=k).map(|d| binom_pmf(k, p, d).unwrap_or(0.0)).collect()
}

/// `P(Binomial(k, p) >= T)` for all `T` in `0..=k`.
///
/// Each tail is taken from whichever side has less mass (the other side by
/// complement), so small tails keep their relative precision. A running
/// minimum then removes sub-ulp wobble where the two routes meet, keeping the
/// curve non-increasing; `T = 0` is exactly one.
fn upper_tails(k: u64, p: f64) -> Result<Vec<f64>> {
    check_prob(p)?;
    let pmf = pmf_vec(k, p);
    let len = pmf.len();

    // lower[t] = sum_{d < t}, upper[t] = sum_{d >= t}, each accumulated from
    // its own far end so the smallest terms are added first.
    let mut lower = vec![0.0; len + 1];
    for d in 0..len {
        lower[d + 1] = lower[d] + pmf[d];
    }
    let mut upper = vec![0.0; len + 1];
    for d in (0..len).rev() {
        upper[d] = upper[d + 1] + pmf[d];
    }

    let mut tails = Vec::with_capacity(len);
    let mut prev = 1.0f64;
    for t in 0..len {
        let v = if t == 0 {
            1.0
        } else if upper[t] <= lower[t] {
            upper[t]
        } else {
            1.0 - lower[t]
        };
        let v = v.clamp(0.0, prev);
        tails.push(v);
        prev = v;
    }
    Ok(tails)
}
