//! Exhaustive ground truth for tiny filters.
//!
//! Counters live in a fixed array, the binary view is a single `u64` mask and
//! dot products are popcounts, sharing nothing with the filter types except
//! the hash.

use crate::error::{Error, Result};
use crate::filter::{digest, FilterParams};

use super::empirical::{EmpiricalRates, Ratio};

pub const ORACLE_MAX_M: usize = 64;
pub const ORACLE_MAX_UNIVERSE: usize = 1 << 16;

/// Exact TPR/FPR over an explicit universe. `stored` indexes into
/// `universe`; every other universe element is a negative. With no negatives
/// the FPR is reported as `0 / 0`.
pub fn brute_force_oracle(
    params: &FilterParams,
    universe: &[Vec<u8>],
    stored: &[usize],
    theta: u32,
    t: usize,
) -> Result<EmpiricalRates> {
    let (m, k) = (params.m(), params.k());
    if m > ORACLE_MAX_M {
        return Err(Error::Oversized(format!("m = {m} > {ORACLE_MAX_M}")));
    }
    if universe.len() > ORACLE_MAX_UNIVERSE {
        return Err(Error::Oversized(format!("universe of {} elements", universe.len())));
    }
    if t > k {
        return Err(Error::InvalidThreshold { threshold: t, k });
    }
    if stored.is_empty() {
        return Err(Error::EmptyStoredSet);
    }
    if let Some(&bad) = stored.iter().find(|&&i| i >= universe.len()) {
        return Err(Error::Config(format!("stored index {bad} outside universe")));
    }

    let mut is_stored = vec![false; universe.len()];
    for &s in stored {
        if std::mem::replace(&mut is_stored[s], true) {
            return Err(Error::Config("stored indices must be distinct".into()));
        }
    }

    let masks: Vec<u64> =
        universe.iter().map(|e| digest(e, params).indices().iter().fold(0u64, |acc, &i| acc | 1 << i)).collect();

    let mut counters = [0u64; ORACLE_MAX_M];
    for &s in stored {
        for (pos, c) in counters.iter_mut().enumerate().take(m) {
            *c += (masks[s] >> pos) & 1;
        }
    }
    let view = (0..m).filter(|&pos| counters[pos] > theta as u64).fold(0u64, |acc, pos| acc | 1 << pos);

    let (mut tpr, mut fpr) = (Ratio::default(), Ratio::default());
    for (i, mask) in masks.iter().enumerate() {
        let accepted = (view & mask).count_ones() as usize >= t;
        let slot = if is_stored[i] { &mut tpr } else { &mut fpr };
        slot.total += 1;
        slot.hits += accepted as u64;
    }
    Ok(EmpiricalRates { tpr, fpr })
}
