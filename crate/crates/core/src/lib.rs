//! Angular range counting with random-hyperplane locality sensitive hashing.
//!
//! Given a dataset of unit vectors and a query `q`, the crate estimates how
//! many points lie within an angular range `[lo, hi]` of `q` without scanning
//! the dataset. Points are hashed into `K` tables of `t`-bit sign addresses;
//! estimators then sample (LSH Count) or probe (Multi-Probe Count) buckets
//! near the query and weight each hit by the inverse of its collision
//! probability.
//!
//! The crate is `no_std` with `alloc`. File formats, the CLI and parallel
//! drivers live in the `alc` companion crate.
//!
//! Module map:
//!
//! - [`geometry`]: unit vectors, angles, datasets and the exact oracle.
//! - [`hashing`]: hyperplane sets, bit addresses and query projections.
//! - [`probability`]: closed-form collision probabilities.
//! - [`counts`]: bucket tables, counts vectors and counts matrices.
//! - [`sampler`]: uniform sampling over buckets at chosen hamming distances.
//! - [`index`]: building the `K` tables and per-query contexts.
//! - [`estimators`]: LSH Count, Multi-Probe Count, baselines and planning.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod counts;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod hashing;
pub mod index;
pub mod probability;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use estimators::{EstimateReport, EstimatorConfig, EstimatorKind, ProbeBudget};
pub use geometry::{AngleRange, Dataset, UnitVector};
pub use hashing::{HashAddress, HyperplaneSet, QueryProjections};
pub use index::{CountsMode, IndexParams, LshIndex, QueryContext};
pub use probability::HammingSet;
