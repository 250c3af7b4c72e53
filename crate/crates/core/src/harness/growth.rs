use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::filter::{AbfView, CountingFilter, ElementDigest, FilterParams};
use crate::model::{accuracy, optimal_k, rates, ModelPoint, RateEstimate};
use crate::tuner::{optimize_theta_t, TuneConstraint};

use super::csv::write_records;
use super::elements::{derive_seed, ElementStream};
use super::empirical::{measure_view, retouched_bf, retouched_rates_model, EmpiricalRates};
use super::{check_common, FilterKind, TrialRecord};

/// Growing element count, four filters compared at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthConfig {
    pub m: usize,
    /// Hash count of the fixed-k filters (autoscaling, plain, retouched).
    pub k: usize,
    pub n_start: usize,
    pub n_stop: usize,
    pub n_step: usize,
    pub l_tpr: f64,
    /// Fraction of set bits the retouched filter erases.
    pub erase_fraction: f64,
    pub query_count: usize,
    pub trials: usize,
    pub base_seed: u64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            m: 10_000,
            k: 100,
            n_start: 50,
            n_stop: 5_000,
            n_step: 50,
            l_tpr: 0.9,
            erase_fraction: 0.001,
            query_count: 10_000,
            trials: 10,
            base_seed: 1,
        }
    }
}

impl GrowthConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.m, self.l_tpr, self.query_count, self.trials)?;
        FilterParams::new(self.m, self.k, 0)?;
        if self.n_start == 0 || self.n_step == 0 || self.n_stop < self.n_start {
            return Err(Error::Config(format!(
                "need 1 <= n_start <= n_stop and n_step >= 1, got {}..={} step {}",
                self.n_start, self.n_stop, self.n_step
            )));
        }
        if !(0.0..=1.0).contains(&self.erase_fraction) {
            return Err(Error::Config(format!("erase_fraction = {} outside [0, 1]", self.erase_fraction)));
        }
        Ok(())
    }

    pub fn n_values(&self) -> Vec<u64> {
        (self.n_start..=self.n_stop).step_by(self.n_step).map(|n| n as u64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub config: GrowthConfig,
    /// Sorted by `(n, filter_kind)`.
    pub records: Vec<TrialRecord>,
    /// Number of times the optimal-k filter had to be built from scratch,
    /// counting its initial construction.
    pub rebuild_count: usize,
}

impl GrowthReport {
    pub fn of_kind(&self, kind: FilterKind) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.filter_kind == kind)
    }

    pub fn get(&self, n: u64, kind: FilterKind) -> Option<&TrialRecord> {
        self.records.iter().find(|r| r.n == n && r.filter_kind == kind)
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        write_records(out, &self.records)
    }
}

/// Per-`n` settings shared by every trial.
struct Step {
    n: u64,
    abf: (u32, u64, RateEstimate),
    sbf: RateEstimate,
    opt_k: u64,
    opt: RateEstimate,
    rebuild: bool,
    retouched: (f64, f64),
}

pub fn run_growth_comparison(config: &GrowthConfig) -> Result<GrowthReport> {
    run_growth_comparison_with(config, Execution::default())
}

pub fn run_growth_comparison_with(config: &GrowthConfig, exec: Execution) -> Result<GrowthReport> {
    config.validate()?;
    let constraint = TuneConstraint::new(config.l_tpr)?;
    let (m, k) = (config.m as u64, config.k as u64);
    let ns = config.n_values();

    let steps = exec.map(ns.len(), |i| -> Result<Step> {
        let n = ns[i];
        let tuned = optimize_theta_t(m, n, k, constraint)?;
        let sbf = rates(&ModelPoint { m, n, k, theta: 0, t: k })?;
        let opt_k = optimal_k(m, n)?.min(m);
        let opt = rates(&ModelPoint { m, n, k: opt_k, theta: 0, t: opt_k })?;
        let retouched = retouched_rates_model(m, k, sbf.one_prob, sbf.fpr, config.erase_fraction);
        Ok(Step { n, abf: (tuned.theta, tuned.t, tuned.predicted), sbf, opt_k, opt, rebuild: false, retouched })
    });
    let mut steps = steps.into_iter().collect::<Result<Vec<_>>>()?;
    let mut prev_k = None;
    for step in &mut steps {
        step.rebuild = prev_k != Some(step.opt_k);
        prev_k = Some(step.opt_k);
    }
    let rebuild_count = steps.iter().filter(|s| s.rebuild).count();

    let per_trial = exec.map(config.trials, |trial| growth_trial(config, trial as u64, &steps));
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let trials = config.trials as f64;
    let mut records = Vec::with_capacity(steps.len() * FilterKind::ALL.len());
    for (si, step) in steps.iter().enumerate() {
        for (ki, kind) in FilterKind::ALL.iter().enumerate() {
            let (mut tpr, mut fpr) = (0.0, 0.0);
            for trial in &per_trial {
                let r = &trial[si][ki];
                tpr += r.tpr();
                fpr += r.fpr().unwrap_or(0.0);
            }
            let (tpr_emp, fpr_emp) = (tpr / trials, fpr / trials);
            let (rk, theta, t, tpr_ana, fpr_ana) = match kind {
                FilterKind::Abf => (k, step.abf.0, step.abf.1, step.abf.2.tpr, step.abf.2.fpr),
                FilterKind::NonoptimizedBf => (k, 0, k, step.sbf.tpr, step.sbf.fpr),
                FilterKind::RetouchedBf => (k, 0, k, step.retouched.0, step.retouched.1),
                FilterKind::OptimizedBf => (step.opt_k, 0, step.opt_k, step.opt.tpr, step.opt.fpr),
            };
            records.push(TrialRecord {
                n: step.n,
                k: rk,
                filter_kind: *kind,
                theta,
                t,
                tpr_emp,
                fpr_emp,
                acc_emp: accuracy(tpr_emp, fpr_emp),
                tpr_ana,
                fpr_ana,
                acc_ana: accuracy(tpr_ana, fpr_ana),
                rebuild: *kind == FilterKind::OptimizedBf && step.rebuild,
            });
        }
    }
    records.sort_by_key(|r| (r.n, r.filter_kind));
    Ok(GrowthReport { config: config.clone(), records, rebuild_count })
}

/// The optimal-k filter for the current step and its absent-query digests.
struct Optimized {
    params: FilterParams,
    filter: CountingFilter,
    absent: Vec<ElementDigest>,
}

/// One trial: elements arrive in order, each filter is measured at every
/// step. Returns, per step, rates in [`FilterKind::ALL`] order.
fn growth_trial(config: &GrowthConfig, trial: u64, steps: &[Step]) -> Result<Vec<[EmpiricalRates; 4]>> {
    let seed = derive_seed(config.base_seed, trial);
    let stream = ElementStream::new(seed);
    let params = FilterParams::new(config.m, config.k, derive_seed(seed, u64::MAX))?;
    let k = config.k;

    let absent: Vec<ElementDigest> =
        (0..config.query_count as u64).map(|j| params.digest(&stream.absent_bytes(j))).collect();
    let mut stored: Vec<ElementDigest> = Vec::with_capacity(config.n_stop);
    let mut filter = CountingFilter::new(params);
    let mut optimized: Option<Optimized> = None;

    let mut out = Vec::with_capacity(steps.len());
    for (si, step) in steps.iter().enumerate() {
        let first_new = stored.len() as u64;
        for i in first_new..step.n {
            let d = params.digest(&stream.stored_bytes(i));
            filter.insert(&d)?;
            stored.push(d);
        }

        let (theta, t, _) = step.abf;
        let abf = measure_view(&filter.binarize(theta, t as usize)?, &stored, &absent)?;
        let sbf_view = filter.binarize(0, k)?;
        let sbf = measure_view(&sbf_view, &stored, &absent)?;
        let retouched_view = retouched_bf(&sbf_view, config.erase_fraction, derive_seed(seed, si as u64))?;
        let retouched = measure_view(&retouched_view, &stored, &absent)?;

        let opt = match optimized.as_mut() {
            Some(o) if !step.rebuild => {
                for i in first_new..step.n {
                    o.filter.insert(&o.params.digest(&stream.stored_bytes(i)))?;
                }
                o
            }
            _ => optimized.insert(build_optimized(config, &stream, &params, step)?),
        };
        let opt_view: AbfView = opt.filter.binarize(0, opt.params.k())?;
        let opt_stored: Vec<ElementDigest> = (0..step.n).map(|i| opt.params.digest(&stream.stored_bytes(i))).collect();
        let optimized_rates = measure_view(&opt_view, &opt_stored, &opt.absent)?;

        out.push([abf, optimized_rates, sbf, retouched]);
    }
    Ok(out)
}

fn build_optimized(
    config: &GrowthConfig,
    stream: &ElementStream,
    params: &FilterParams,
    step: &Step,
) -> Result<Optimized> {
    let params = params.with_k(step.opt_k as usize)?;
    let mut filter = CountingFilter::new(params);
    for i in 0..step.n {
        filter.insert(&params.digest(&stream.stored_bytes(i)))?;
    }
    let absent = (0..config.query_count as u64).map(|j| params.digest(&stream.absent_bytes(j))).collect();
    Ok(Optimized { params, filter, absent })
}
