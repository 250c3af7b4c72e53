//! Autoscaling Bloom filter.
//!
//! A counting Bloom filter whose binary view is produced on demand by
//! zeroing every counter at or below a binarization threshold `theta`, and
//! queried by requiring at least `T` of an element's `k` positions to be set.
//! Raising `theta` trades a bounded loss of true positives for far fewer
//! false positives; [`tuner`] picks `(theta, T)` from the closed-form model
//! in [`model`] as the number of stored elements changes, without touching
//! `m`, `k` or the hash functions.
//!
//! ```
//! use abf_core::filter::{CountingFilter, FilterParams};
//! use abf_core::tuner::{optimize_theta_t, TuneConstraint};
//!
//! let params = FilterParams::new(10_000, 100, 7).unwrap();
//! let mut filter = CountingFilter::new(params);
//! for i in 0u32..500 {
//!     filter.insert_element(&i.to_le_bytes()).unwrap();
//! }
//! let tuned = optimize_theta_t(10_000, 500, 100, TuneConstraint::new(0.97).unwrap()).unwrap();
//! let view = filter.binarize(tuned.theta, tuned.t as usize).unwrap();
//! assert!(tuned.predicted.tpr >= 0.97);
//! let _hit = view.query_element(&3u32.to_le_bytes());
//! ```

pub mod error;
pub mod exec;
pub mod filter;
pub mod harness;
pub mod model;
pub mod tuner;

pub use error::{Error, Result};
pub use exec::Execution;
