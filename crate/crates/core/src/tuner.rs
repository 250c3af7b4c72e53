//! Choosing the binarization and decision thresholds.
//!
//! Every candidate `(theta, T)` is scored by the analytic model. Candidates
//! whose predicted TPR falls below the floor are discarded; among the rest
//! the best score wins. Scores within [`TIE_EPS`] of the best are ties and
//! resolve to the smallest `theta`, then the largest `T`.

use std::ops::RangeInclusive;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{AbfView, CountingFilter};
use crate::model::{RateEstimate, ThresholdCurve};

/// Scores closer than this count as equal.
pub const TIE_EPS: f64 = 1e-12;

/// Relative drift in `n` that triggers a retune in [`Autoscaler`].
pub const DEFAULT_RETUNE_TRIGGER: f64 = 0.1;

/// Lowest acceptable true positive rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuneConstraint {
    l_tpr: f64,
}

impl TuneConstraint {
    pub fn new(l_tpr: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&l_tpr) {
            Ok(TuneConstraint { l_tpr })
        } else {
            Err(Error::InvalidProbability(l_tpr))
        }
    }

    pub fn l_tpr(&self) -> f64 {
        self.l_tpr
    }

    pub fn admits(&self, estimate_tpr: f64) -> bool {
        estimate_tpr >= self.l_tpr
    }
}

/// Objective maximized by the tuner.
pub trait Objective {
    fn score(&self, tpr: f64, fpr: f64) -> f64;
}

/// Balanced accuracy, `(TPR + 1 - FPR) / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accuracy;

impl Objective for Accuracy {
    fn score(&self, tpr: f64, fpr: f64) -> f64 {
        crate::model::accuracy(tpr, fpr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TuneResult {
    pub theta: u32,
    pub t: u64,
    pub predicted: RateEstimate,
    pub feasible: bool,
    pub candidates_evaluated: usize,
}

/// Largest `theta` worth trying: six standard deviations above the mean
/// counter value, capped at `n`. Past it `P1` is numerically zero.
pub fn theta_cap(m: u64, n: u64, k: u64) -> u32 {
    let p = k as f64 / m as f64;
    let n_f = n as f64;
    let cap = (n_f * p + 6.0 * (n_f * p * (1.0 - p)).sqrt()).ceil() as u64;
    cap.min(n).min(u32::MAX as u64) as u32
}

/// Best `T` at fixed `theta`.
pub fn optimize_t(m: u64, n: u64, k: u64, theta: u32, constraint: TuneConstraint) -> Result<TuneResult> {
    optimize_over(m, n, k, theta..=theta, constraint, &Accuracy)
}

/// Best `(theta, T)` over `0..=theta_cap(m, n, k)`.
pub fn optimize_theta_t(m: u64, n: u64, k: u64, constraint: TuneConstraint) -> Result<TuneResult> {
    optimize_over(m, n, k, 0..=theta_cap(m, n, k), constraint, &Accuracy)
}

/// Best `(theta, T)` with `theta` restricted to `thetas`, under any objective.
pub fn optimize_over<O: Objective + ?Sized>(
    m: u64,
    n: u64,
    k: u64,
    thetas: RangeInclusive<u32>,
    constraint: TuneConstraint,
    objective: &O,
) -> Result<TuneResult> {
    if n == 0 {
        return Err(Error::EmptyFilter);
    }
    if thetas.is_empty() {
        return Err(Error::Config("empty theta range".into()));
    }
    let curves = thetas.map(|theta| ThresholdCurve::new(m, n, k, theta)).collect::<Result<Vec<_>>>()?;

    let feasible = |c: &ThresholdCurve, t: usize| constraint.admits(c.tpr()[t]);
    let score = |c: &ThresholdCurve, t: usize| objective.score(c.tpr()[t], c.fpr()[t]);

    let mut evaluated = 0usize;
    let mut best = f64::NEG_INFINITY;
    for c in &curves {
        for t in 0..=k as usize {
            evaluated += 1;
            if feasible(c, t) {
                best = best.max(score(c, t));
            }
        }
    }

    // T = 0 always has TPR = 1, so some candidate is feasible.
    let (curve, t) = curves
        .iter()
        .find_map(|c| (0..=k as usize).rev().find(|&t| feasible(c, t) && score(c, t) >= best - TIE_EPS).map(|t| (c, t)))
        .expect("T = 0 satisfies every TPR floor");

    let predicted = curve.estimate(t as u64)?;
    Ok(TuneResult {
        theta: curve.theta(),
        t: t as u64,
        feasible: constraint.admits(predicted.tpr),
        predicted,
        candidates_evaluated: evaluated,
    })
}

/// Keeps a tuned view of a counting filter, retuning only when the stored
/// element count has drifted far enough from the last snapshot.
///
/// One `Autoscaler` per filter; calls must be serialized by the caller.
/// The returned views are immutable and may be shared freely.
#[derive(Debug, Clone)]
pub struct Autoscaler {
    constraint: TuneConstraint,
    retune_trigger: f64,
    cached: Option<(Arc<AbfView>, TuneResult)>,
}

impl Autoscaler {
    pub fn new(constraint: TuneConstraint) -> Self {
        Self::with_trigger(constraint, DEFAULT_RETUNE_TRIGGER)
    }

    pub fn with_trigger(constraint: TuneConstraint, retune_trigger: f64) -> Self {
        Autoscaler { constraint, retune_trigger, cached: None }
    }

    /// Tuning behind the current cached view, if any.
    pub fn last_tune(&self) -> Option<&TuneResult> {
        self.cached.as_ref().map(|(_, r)| r)
    }

    pub fn view(&mut self, filter: &CountingFilter) -> Result<Arc<AbfView>> {
        let n = filter.n_stored();
        if n == 0 {
            return Err(Error::EmptyFilter);
        }
        if let Some((view, _)) = &self.cached {
            let snap = view.n_at_snapshot();
            if view.params() == filter.params() && !self.drifted(snap, n) {
                return Ok(Arc::clone(view));
            }
        }
        let p = filter.params();
        let tuned = optimize_theta_t(p.m() as u64, n, p.k() as u64, self.constraint)?;
        let view = Arc::new(filter.binarize(tuned.theta, tuned.t as usize)?);
        self.cached = Some((Arc::clone(&view), tuned));
        Ok(view)
    }

    fn drifted(&self, snapshot_n: u64, n: u64) -> bool {
        if snapshot_n == 0 {
            return true;
        }
        (n as f64 - snapshot_n as f64).abs() / snapshot_n as f64 > self.retune_trigger
    }
}
