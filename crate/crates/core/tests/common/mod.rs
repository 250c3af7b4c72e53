//! Property checks shared by the `properties` and `acceptance` targets.
//! Each returns `Err` with the shrunk counterexample on failure.

#![allow(dead_code)]

use abf_core::filter::{CountingFilter, ElementDigest, FilterParams};
use abf_core::harness::{run_growth_comparison_with, run_threshold_sweep_with, GrowthConfig, SweepConfig};
use abf_core::model::{accuracy, p_empty, pr_counter, rates, CollisionModel, ModelPoint};
use abf_core::tuner::{optimize_theta_t, theta_cap, TuneConstraint, TIE_EPS};
use abf_core::{Error, Execution};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Check = Result<(), String>;
pub type NamedCheck = (&'static str, fn() -> Check);

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check
where
    S::Value: std::fmt::Debug,
{
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// `(m, k, seed)` for a small filter.
fn small_params() -> impl Strategy<Value = FilterParams> {
    (1usize..=200, 1usize..=20, any::<u64>()).prop_map(|(m, k, seed)| FilterParams::new(m, k.min(m), seed).unwrap())
}

fn filled(params: FilterParams, elements: &[u16]) -> CountingFilter {
    let mut f = CountingFilter::new(params);
    for e in elements {
        f.insert_element(&e.to_le_bytes()).unwrap();
    }
    f
}

fn counter_sum(f: &CountingFilter) -> u64 {
    f.counters().iter().map(|&c| c as u64).sum()
}

/// Random insert/remove sequences keep `sum(counters) = k * n_stored`; failed
/// operations change nothing.
pub fn conservation() -> Check {
    let ops = prop::collection::vec((any::<bool>(), 0u16..40), 0..120);
    run(256, (small_params(), 1u32..=4, ops), |(params, cap, ops)| {
        let params = FilterParams::with_counter_max(params.m(), params.k(), params.seed(), cap).unwrap();
        let mut f = CountingFilter::new(params);
        for (insert, e) in ops {
            let before = f.clone();
            let bytes = e.to_le_bytes();
            let r = if insert { f.insert_element(&bytes) } else { f.remove_element(&bytes) };
            if r.is_err() {
                prop_assert_eq!(&f, &before);
            }
            prop_assert_eq!(counter_sum(&f), params.k() as u64 * f.n_stored());
        }
        Ok(())
    })
}

/// Removing one element equals never having inserted it; removing all
/// clears the filter.
pub fn insert_remove_inversion() -> Check {
    let elements = prop::collection::vec(0u16..500, 1..60);
    run(256, (small_params(), elements, any::<prop::sample::Index>()), |(params, elements, pick)| {
        let x = pick.index(elements.len());
        let mut f = filled(params, &elements);
        f.remove_element(&elements[x].to_le_bytes()).unwrap();
        let mut rest = elements.clone();
        rest.remove(x);
        prop_assert_eq!(&f, &filled(params, &rest));

        for e in &rest {
            f.remove_element(&e.to_le_bytes()).unwrap();
        }
        prop_assert_eq!(&f, &CountingFilter::new(params));
        prop_assert_eq!(f.remove_element(&[0]), Err(Error::Underflow { index: None }));
        Ok(())
    })
}

/// `theta = 0, T = k` answers exactly like a textbook bit-array Bloom filter
/// and never rejects a stored element.
pub fn sbf_equivalence() -> Check {
    let stored = prop::collection::vec(0u16..1000, 1..60);
    run(256, (small_params(), stored), |(params, stored)| {
        let f = filled(params, &stored);
        let view = f.binarize(0, params.k()).unwrap();
        let mut bits = vec![false; params.m()];
        for e in &stored {
            for &i in params.digest(&e.to_le_bytes()).indices() {
                bits[i] = true;
            }
        }
        for e in 0u16..1200 {
            let d = params.digest(&e.to_le_bytes());
            prop_assert_eq!(view.query(&d), d.indices().iter().all(|&i| bits[i]));
        }
        for e in &stored {
            prop_assert!(view.query_element(&e.to_le_bytes()));
        }
        Ok(())
    })
}

/// Dot products never grow with `theta`; acceptance at `T` implies
/// acceptance at every smaller `T`.
pub fn monotonicity() -> Check {
    let stored = prop::collection::vec(0u16..100, 0..80);
    run(128, (small_params(), stored, prop::collection::vec(any::<u16>(), 1..20)), |(params, stored, queries)| {
        let f = filled(params, &stored);
        let top = f.counters().iter().copied().max().unwrap_or(0) + 1;
        let digests: Vec<ElementDigest> = queries.iter().map(|q| params.digest(&q.to_le_bytes())).collect();
        for d in &digests {
            let mut last = usize::MAX;
            for theta in 0..=top {
                let dot = f.binarize(theta, 0).unwrap().dot(d);
                prop_assert!(dot <= last);
                last = dot;
            }
            prop_assert_eq!(last, 0);
        }
        for theta in 0..=top.min(3) {
            let views: Vec<_> = (0..=params.k()).map(|t| f.binarize(theta, t).unwrap()).collect();
            for d in &digests {
                for t in 1..views.len() {
                    prop_assert!(!views[t].query(d) || views[t - 1].query(d));
                }
                prop_assert!(views[0].query(d));
            }
        }
        Ok(())
    })
}

/// The counter-value pmf sums to one within 1e-12 for every `n <= 10^4`.
pub fn pmf_normalization() -> Check {
    let p = prop_oneof![1e-9..1e-3, 1e-3..0.5, 0.5..1.0 - 1e-9];
    run(96, (1u64..=10_000, p), |(n, p)| {
        let mut total = 0.0;
        for v in 0..=n {
            total += pr_counter(n, p, v).unwrap();
        }
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum = {total}");
        Ok(())
    })?;
    for (n, p) in [(1, 0.5), (10_000, 0.01), (10_000, 0.5), (10_000, 1e-4), (10_000, 0.999)] {
        let total: f64 = (0..=n).map(|v| pr_counter(n, p, v).unwrap()).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(format!("n = {n}, p = {p}: sum = {total}"));
        }
    }
    Ok(())
}

/// Distinct-index and with-replacement empty-position probabilities at
/// m = 10000, n = 500, k = 100.
pub fn collision_models_agree() -> Check {
    let a = p_empty(10_000, 500, 100, CollisionModel::Distinct);
    let b = p_empty(10_000, 500, 100, CollisionModel::WithReplacement);
    if (a - b).abs() < 1e-3 {
        Ok(())
    } else {
        Err(format!("gap {} between {a} and {b}", (a - b).abs()))
    }
}

/// The tuner's pick equals exhaustive enumeration over every `(theta, T)`
/// with `theta <= n`: best feasible accuracy, then smallest `theta`, then
/// largest `T`.
pub fn tuner_matches_exhaustive_search() -> Check {
    let instance = (2u64..=200, 1u64..=50, 1u64..=20, 0.0..=1.0f64).prop_map(|(m, n, k, l)| (m, n, k.min(m), l));
    run(48, instance, |(m, n, k, l_tpr)| {
        let constraint = TuneConstraint::new(l_tpr).unwrap();
        let tuned = optimize_theta_t(m, n, k, constraint).unwrap();
        prop_assert_eq!(&tuned, &optimize_theta_t(m, n, k, constraint).unwrap());

        let mut grid = Vec::new();
        for theta in 0..=n as u32 {
            for t in 0..=k {
                let r = rates(&ModelPoint { m, n, k, theta, t }).unwrap();
                if r.tpr >= l_tpr {
                    grid.push((theta, t, r));
                }
            }
        }
        let best = grid.iter().map(|(_, _, r)| r.acc).fold(f64::NEG_INFINITY, f64::max);
        let cap = theta_cap(m, n, k);
        let in_cap = grid.iter().filter(|(theta, ..)| *theta <= cap);
        let cap_best = in_cap.clone().map(|(_, _, r)| r.acc).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(cap_best >= best - TIE_EPS, "cap {cap} loses: {cap_best} < {best}");

        let theta = in_cap.clone().filter(|(_, _, r)| r.acc >= cap_best - TIE_EPS).map(|g| g.0).min().unwrap();
        let t = in_cap.filter(|(th, _, r)| *th == theta && r.acc >= cap_best - TIE_EPS).map(|g| g.1).max().unwrap();
        prop_assert_eq!((tuned.theta, tuned.t), (theta, t));
        prop_assert!(tuned.feasible && tuned.predicted.tpr >= l_tpr);

        let sbf = rates(&ModelPoint { m, n, k, theta: 0, t: k }).unwrap();
        prop_assert!(tuned.predicted.acc >= accuracy(sbf.tpr, sbf.fpr) - TIE_EPS);
        Ok(())
    })
}

/// Serialize, parse, serialize again: identical bytes and identical filter.
pub fn serialization_round_trip() -> Check {
    let stored = prop::collection::vec(any::<u16>(), 0..100);
    run(256, (small_params(), stored), |(params, stored)| {
        let f = filled(params, &stored);
        let bytes = f.to_bytes();
        let back = CountingFilter::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_bytes(), bytes);
        Ok(())
    })
}

fn sweep_csv(cfg: &SweepConfig, exec: Execution) -> Vec<u8> {
    let mut out = Vec::new();
    run_threshold_sweep_with(cfg, exec).unwrap().write_csv(&mut out).unwrap();
    out
}

fn growth_csv(cfg: &GrowthConfig, exec: Execution) -> Vec<u8> {
    let mut out = Vec::new();
    run_growth_comparison_with(cfg, exec).unwrap().write_csv(&mut out).unwrap();
    out
}

/// Same configuration and seed give byte-identical CSV, whatever the
/// scheduling; a different seed changes the output.
pub fn csv_reproducibility() -> Check {
    let sweep = SweepConfig { m: 2_000, n: 100, k: 20, query_count: 2_000, trials: 4, ..SweepConfig::default() };
    let growth = GrowthConfig {
        m: 2_000,
        k: 20,
        n_start: 20,
        n_stop: 600,
        n_step: 20,
        query_count: 1_000,
        trials: 3,
        ..GrowthConfig::default()
    };
    let a = sweep_csv(&sweep, Execution::Parallel);
    if a != sweep_csv(&sweep, Execution::Parallel) || a != sweep_csv(&sweep, Execution::Sequential) {
        return Err("threshold sweep CSV differs between identical runs".into());
    }
    if a == sweep_csv(&SweepConfig { base_seed: 2, ..sweep.clone() }, Execution::Parallel) {
        return Err("threshold sweep CSV ignores the seed".into());
    }
    let b = growth_csv(&growth, Execution::Parallel);
    if b != growth_csv(&growth, Execution::Parallel) || b != growth_csv(&growth, Execution::Sequential) {
        return Err("growth CSV differs between identical runs".into());
    }
    if b == growth_csv(&GrowthConfig { base_seed: 2, ..growth }, Execution::Parallel) {
        return Err("growth CSV ignores the seed".into());
    }
    Ok(())
}

pub const ALL: [NamedCheck; 9] = [
    ("conservation", conservation),
    ("insert/remove inversion", insert_remove_inversion),
    ("SBF equivalence", sbf_equivalence),
    ("monotonicity", monotonicity),
    ("pmf normalization", pmf_normalization),
    ("collision models", collision_models_agree),
    ("tuner vs exhaustive search", tuner_matches_exhaustive_search),
    ("serialization round trip", serialization_round_trip),
    ("CSV reproducibility", csv_reproducibility),
];

/// Library rates equal the brute-force oracle's exact counts on random tiny
/// instances (`m <= 32`, `k <= 5`, `n <= 8`).
pub fn oracle_equivalence(instances: usize) -> Check {
    use abf_core::harness::{brute_force_oracle, measure_empirical_rates};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0ac1e);
    for case in 0..instances {
        let m = rng.gen_range(1..=32);
        let k = rng.gen_range(1..=5usize.min(m));
        let params = FilterParams::new(m, k, rng.gen()).unwrap();
        let n = rng.gen_range(1..=8);
        let size = rng.gen_range(n..=n + 40);
        let universe: Vec<Vec<u8>> = (0..size as u32).map(|i| format!("u{i}").into_bytes()).collect();
        let mut order: Vec<usize> = (0..size).collect();
        order.shuffle(&mut rng);
        let stored = &order[..n];
        let theta = rng.gen_range(0..=3);
        let t = rng.gen_range(0..=k);

        let mut filter = CountingFilter::new(params);
        for &s in stored {
            filter.insert_element(&universe[s]).unwrap();
        }
        let digests = |idx: &[usize]| idx.iter().map(|&i| params.digest(&universe[i])).collect::<Vec<_>>();
        let library = measure_empirical_rates(&filter, &digests(stored), &digests(&order[n..]), theta, t)
            .map_err(|e| format!("case {case}: {e}"))?;
        let oracle =
            brute_force_oracle(&params, &universe, stored, theta, t).map_err(|e| format!("case {case}: {e}"))?;
        if library != oracle {
            return Err(format!("case {case} (m={m}, k={k}, n={n}, theta={theta}, T={t}): {library:?} vs {oracle:?}"));
        }
    }
    Ok(())
}
