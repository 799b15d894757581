//! Std companion to `alc-core`: embedding loaders, index files, a seeded
//! synthetic fixture, the experiment runner and the `alc` command line.

pub mod bench;
pub mod embeddings;
pub mod error;
pub mod fixture;
pub mod persist;
pub mod runner;

use alc_core::index::LshTable;
use alc_core::{Dataset, IndexParams, LshIndex};
use rayon::prelude::*;

pub use error::{AlcError, Result};

/// Builds the tables of an index on the rayon pool. The result equals
/// [`LshIndex::build`] for the same parameters.
pub fn build_index_parallel(data: &Dataset, params: IndexParams) -> Result<LshIndex> {
    let tables = (0..params.tables)
        .into_par_iter()
        .map(|k| LshTable::build(data, &params, k))
        .collect::<alc_core::Result<Vec<_>>>()?;
    Ok(LshIndex::from_tables(
        params,
        data.dim(),
        tables,
        data.labels().map(<[String]>::to_vec),
    )?)
}
