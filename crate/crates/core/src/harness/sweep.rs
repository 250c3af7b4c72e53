use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::filter::{CountingFilter, ElementDigest, FilterParams};
use crate::model::{accuracy, RateEstimate, ThresholdCurve};
use crate::tuner::{optimize_over, optimize_t, Accuracy, TuneConstraint, TuneResult};

use super::csv::{format_sig6, write_records};
use super::elements::{derive_seed, ElementStream};
use super::empirical::dot_histogram;
use super::{check_common, FilterKind, TrialRecord};

/// Fixed filter, several binarization thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Thresholds `0..=theta_max` are evaluated.
    pub theta_max: u32,
    pub l_tpr: f64,
    pub query_count: usize,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            m: 10_000,
            n: 500,
            k: 100,
            theta_max: 5,
            l_tpr: 0.97,
            query_count: 10_000,
            trials: 10,
            base_seed: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.m, self.l_tpr, self.query_count, self.trials)?;
        FilterParams::new(self.m, self.k, 0)?;
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: u32,
    /// Decision threshold tuned for this `theta`.
    pub t: u64,
    pub analytic: RateEstimate,
    pub tpr_emp: f64,
    pub fpr_emp: f64,
    pub acc_emp: f64,
    /// Model pmf of the stored-element dot product over `0..=k`.
    pub stored_pmf: Vec<f64>,
    pub absent_pmf: Vec<f64>,
    /// Observed dot products summed over all trials.
    pub stored_hist: Vec<u64>,
    pub absent_hist: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Joint optimum over the swept thresholds.
    pub best: TuneResult,
}

impl SweepReport {
    pub fn row(&self, theta: u32) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.theta == theta)
    }

    pub fn records(&self) -> Vec<TrialRecord> {
        self.rows
            .iter()
            .map(|r| TrialRecord {
                n: self.config.n as u64,
                k: self.config.k as u64,
                filter_kind: FilterKind::Abf,
                theta: r.theta,
                t: r.t,
                tpr_emp: r.tpr_emp,
                fpr_emp: r.fpr_emp,
                acc_emp: r.acc_emp,
                tpr_ana: r.analytic.tpr,
                fpr_ana: r.analytic.fpr,
                acc_ana: r.analytic.acc,
                rebuild: false,
            })
            .collect()
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        write_records(out, &self.records())
    }

    /// Per-theta dot-product distributions: model pmfs next to observed
    /// frequencies.
    pub fn write_pmf_csv<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,d,pmf_stored,pmf_absent,freq_stored,freq_absent")?;
        for r in &self.rows {
            let ns: u64 = r.stored_hist.iter().sum();
            let na: u64 = r.absent_hist.iter().sum();
            for d in 0..r.stored_pmf.len() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.theta,
                    d,
                    format_sig6(r.stored_pmf[d]),
                    format_sig6(r.absent_pmf[d]),
                    format_sig6(r.stored_hist[d] as f64 / ns as f64),
                    format_sig6(r.absent_hist[d] as f64 / na as f64),
                )?;
            }
        }
        out.flush()
    }
}

pub fn run_threshold_sweep(config: &SweepConfig) -> Result<SweepReport> {
    run_threshold_sweep_with(config, Execution::default())
}

pub fn run_threshold_sweep_with(config: &SweepConfig, exec: Execution) -> Result<SweepReport> {
    config.validate()?;
    let (m, n, k) = (config.m as u64, config.n as u64, config.k as u64);
    let constraint = TuneConstraint::new(config.l_tpr)?;

    let tuned =
        (0..=config.theta_max).map(|theta| optimize_t(m, n, k, theta, constraint)).collect::<Result<Vec<_>>>()?;
    let best = optimize_over(m, n, k, 0..=config.theta_max, constraint, &Accuracy)?;
    let thresholds: Vec<(u32, usize)> = tuned.iter().map(|r| (r.theta, r.t as usize)).collect();

    let per_trial = exec.map(config.trials, |trial| sweep_trial(config, trial as u64, &thresholds));
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(tuned.len());
    for (i, tune) in tuned.iter().enumerate() {
        let curve = ThresholdCurve::new(m, n, k, tune.theta)?;
        let mut stored_hist = vec![0u64; config.k + 1];
        let mut absent_hist = vec![0u64; config.k + 1];
        let (mut tpr_sum, mut fpr_sum) = (0.0, 0.0);
        for trial in &per_trial {
            let (sh, ah) = &trial[i];
            let t = tune.t as usize;
            tpr_sum += sh[t..].iter().sum::<u64>() as f64 / config.n as f64;
            fpr_sum += ah[t..].iter().sum::<u64>() as f64 / config.query_count as f64;
            add_into(&mut stored_hist, sh);
            add_into(&mut absent_hist, ah);
        }
        let trials = config.trials as f64;
        let (tpr_emp, fpr_emp) = (tpr_sum / trials, fpr_sum / trials);
        rows.push(SweepRow {
            theta: tune.theta,
            t: tune.t,
            analytic: tune.predicted,
            tpr_emp,
            fpr_emp,
            acc_emp: accuracy(tpr_emp, fpr_emp),
            stored_pmf: curve.stored_pmf(),
            absent_pmf: curve.absent_pmf(),
            stored_hist,
            absent_hist,
        });
    }
    Ok(SweepReport { config: config.clone(), rows, best })
}

type Histograms = (Vec<u64>, Vec<u64>);

fn sweep_trial(config: &SweepConfig, trial: u64, thresholds: &[(u32, usize)]) -> Result<Vec<Histograms>> {
    let seed = derive_seed(config.base_seed, trial);
    let stream = ElementStream::new(seed);
    let params = FilterParams::new(config.m, config.k, derive_seed(seed, u64::MAX))?;

    let stored: Vec<ElementDigest> = (0..config.n as u64).map(|i| params.digest(&stream.stored_bytes(i))).collect();
    let absent: Vec<ElementDigest> =
        (0..config.query_count as u64).map(|j| params.digest(&stream.absent_bytes(j))).collect();
    let mut filter = CountingFilter::new(params);
    for d in &stored {
        filter.insert(d)?;
    }
    thresholds
        .iter()
        .map(|&(theta, t)| {
            let view = filter.binarize(theta, t)?;
            Ok((dot_histogram(&view, &stored), dot_histogram(&view, &absent)))
        })
        .collect()
}

fn add_into(acc: &mut [u64], xs: &[u64]) {
    for (a, x) in acc.iter_mut().zip(xs) {
        *a += x;
    }
}
