//! Monte Carlo evaluation and the two reference experiments.
//!
//! * [`run_threshold_sweep`]: one filter (m = 10 000, n = 500, k = 100)
//!   binarized at `theta = 0..=5`, each with its tuned decision threshold.
//! * [`run_growth_comparison`]: n grows from 50 to 5 000 and four filters
//!   are compared at every step: the tuned autoscaling view, a Bloom filter
//!   rebuilt with the optimal k, the fixed-k Bloom filter, and the fixed-k
//!   filter with 0.1% of its set bits erased.
//!
//! Trials are independent and seeded from `base_seed`; output depends only on
//! the config, never on scheduling.

mod csv;
mod elements;
mod empirical;
mod growth;
mod oracle;
mod sweep;

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

pub use self::csv::{format_sig6, write_records, CSV_HEADER};
pub use elements::{derive_seed, mix64, ElementStream};
pub use empirical::{
    dot_histogram, measure_empirical_rates, measure_view, retouched_bf, retouched_rates_model, EmpiricalRates, Ratio,
};
pub use growth::{run_growth_comparison, run_growth_comparison_with, GrowthConfig, GrowthReport};
pub use oracle::{brute_force_oracle, ORACLE_MAX_M, ORACLE_MAX_UNIVERSE};
pub use sweep::{run_threshold_sweep, run_threshold_sweep_with, SweepConfig, SweepReport, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Abf,
    OptimizedBf,
    NonoptimizedBf,
    RetouchedBf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] =
        [FilterKind::Abf, FilterKind::OptimizedBf, FilterKind::NonoptimizedBf, FilterKind::RetouchedBf];

    pub fn as_str(&self) -> &'static str {
        match self {
            FilterKind::Abf => "abf",
            FilterKind::OptimizedBf => "optimized_bf",
            FilterKind::NonoptimizedBf => "nonoptimized_bf",
            FilterKind::RetouchedBf => "retouched_bf",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One output row: a filter at one `n`, rates averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: u64,
    pub k: u64,
    pub filter_kind: FilterKind,
    pub theta: u32,
    pub t: u64,
    pub tpr_emp: f64,
    pub fpr_emp: f64,
    pub acc_emp: f64,
    pub tpr_ana: f64,
    pub fpr_ana: f64,
    pub acc_ana: f64,
    pub rebuild: bool,
}

pub(crate) fn check_common(m: usize, l_tpr: f64, query_count: usize, trials: usize) -> crate::Result<()> {
    use crate::Error;
    if m == 0 {
        return Err(Error::Config("m must be positive".into()));
    }
    if !(0.0..=1.0).contains(&l_tpr) {
        return Err(Error::Config(format!("l_tpr = {l_tpr} outside [0, 1]")));
    }
    if query_count == 0 {
        return Err(Error::Config("query_count must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    Ok(())
}

/// Write `records` as CSV to any writer.
pub fn write_csv<W: io::Write>(out: W, records: &[TrialRecord]) -> io::Result<()> {
    write_records(out, records)
}
