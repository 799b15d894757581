//! Index construction and per-query contexts.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::counts::{AnchoredCounts, BucketTable, CountsSource, DenseCounts, MAX_DENSE_BITS};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, Dataset, UnitVector};
use crate::hashing::{check_bits, HashAddress, HyperplaneSet, QueryProjections};

/// `Auto` precomputes dense counts up to this many bits.
pub const AUTO_DENSE_BITS: u32 = 12;

/// How counts structures are provided to the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CountsMode {
    /// Dense when `t <= AUTO_DENSE_BITS`, otherwise sparse.
    #[default]
    Auto,
    /// Precompute every counts matrix (`t <= MAX_DENSE_BITS`).
    Dense,
    /// Answer counts per query from the bucket lists.
    Sparse,
}

impl CountsMode {
    pub fn is_dense(self, t: u32) -> bool {
        match self {
            CountsMode::Auto => t <= AUTO_DENSE_BITS,
            CountsMode::Dense => true,
            CountsMode::Sparse => false,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            CountsMode::Auto => 0,
            CountsMode::Dense => 1,
            CountsMode::Sparse => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(CountsMode::Auto),
            1 => Some(CountsMode::Dense),
            2 => Some(CountsMode::Sparse),
            _ => None,
        }
    }
}

/// Build parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexParams {
    /// Bits per table.
    pub t: u32,
    /// Number of tables `K`.
    pub tables: u32,
    pub seed: u64,
    pub mode: CountsMode,
}

impl IndexParams {
    pub fn new(t: u32, tables: u32, seed: u64, mode: CountsMode) -> Result<Self> {
        check_bits(t)?;
        if tables == 0 {
            return Err(Error::config("need at least one table"));
        }
        if mode == CountsMode::Dense && t > MAX_DENSE_BITS {
            return Err(Error::config(alloc::format!(
                "dense counts need t <= {MAX_DENSE_BITS}, got {t}"
            )));
        }
        Ok(IndexParams { t, tables, seed, mode })
    }
}

/// Planes, buckets and optional dense counts of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct LshTable {
    planes: HyperplaneSet,
    buckets: BucketTable,
    dense: Option<DenseCounts>,
}

impl LshTable {
    /// Builds table `k`: planes from stream `k` of the master seed.
    pub fn build(data: &Dataset, params: &IndexParams, k: u32) -> Result<Self> {
        let planes = HyperplaneSet::generate(params.t, data.dim(), params.seed, k as u64)?;
        let addrs = data
            .vectors()
            .iter()
            .map(|v| planes.hash_slice(v.as_slice()).bits())
            .collect();
        Self::from_parts(planes, BucketTable::from_assignment(params.t, addrs)?, params.mode)
    }

    pub fn from_parts(planes: HyperplaneSet, buckets: BucketTable, mode: CountsMode) -> Result<Self> {
        if planes.t() != buckets.t() {
            return Err(Error::BitCountMismatch(planes.t(), buckets.t()));
        }
        let dense = if mode.is_dense(planes.t()) {
            Some(DenseCounts::build(&buckets)?)
        } else {
            None
        };
        Ok(LshTable { planes, buckets, dense })
    }

    pub fn planes(&self) -> &HyperplaneSet {
        &self.planes
    }

    pub fn buckets(&self) -> &BucketTable {
        &self.buckets
    }

    pub fn dense(&self) -> Option<&DenseCounts> {
        self.dense.as_ref()
    }

    /// Counts provider for a walk anchored at the query address.
    pub fn counts_source(&self, anchor: HashAddress) -> Result<Box<dyn CountsSource + '_>> {
        Ok(match &self.dense {
            Some(d) => Box::new(d),
            None => Box::new(AnchoredCounts::new(&self.buckets, anchor)?),
        })
    }
}

/// `K` tables over a dataset. Vectors are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct LshIndex {
    params: IndexParams,
    dim: usize,
    n: usize,
    tables: Vec<LshTable>,
    labels: Option<Vec<String>>,
}

impl LshIndex {
    /// Builds all tables sequentially.
    pub fn build(data: &Dataset, params: IndexParams) -> Result<Self> {
        let tables = (0..params.tables)
            .map(|k| LshTable::build(data, &params, k))
            .collect::<Result<Vec<_>>>()?;
        Self::from_tables(params, data.dim(), tables, data.labels().map(<[String]>::to_vec))
    }

    /// Assembles an index from tables built elsewhere (in parallel, or read
    /// from disk).
    pub fn from_tables(
        params: IndexParams,
        dim: usize,
        tables: Vec<LshTable>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if tables.len() != params.tables as usize {
            return Err(Error::config("table count does not match parameters"));
        }
        let n = tables.first().map_or(0, |t| t.buckets.n());
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        for table in &tables {
            if table.buckets.n() != n {
                return Err(Error::config("tables disagree on element count"));
            }
            if table.planes.t() != params.t {
                return Err(Error::BitCountMismatch(params.t, table.planes.t()));
            }
            check_dim(dim, table.planes.dim())?;
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LabelCountMismatch {
                    labels: l.len(),
                    vectors: n,
                });
            }
        }
        Ok(LshIndex {
            params,
            dim,
            n,
            tables,
            labels,
        })
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    pub fn t(&self) -> u32 {
        self.params.t
    }

    /// Number of tables `K`.
    pub fn k(&self) -> usize {
        self.tables.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tables(&self) -> &[LshTable] {
        &self.tables
    }

    pub fn table(&self, k: usize) -> &LshTable {
        &self.tables[k]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_dense(&self) -> bool {
        self.tables.iter().all(|t| t.dense.is_some())
    }

    /// Checks that `data` is the dataset this index was built over.
    pub fn check_dataset(&self, data: &Dataset) -> Result<()> {
        check_dim(self.dim, data.dim())?;
        if data.len() != self.n {
            return Err(Error::config(alloc::format!(
                "index holds {} elements, dataset has {}",
                self.n,
                data.len()
            )));
        }
        Ok(())
    }

    pub fn query(&self, q: &UnitVector) -> Result<QueryContext> {
        make_query_context(self, q)
    }
}

/// Free-function form of [`LshIndex::build`].
pub fn build_index(data: &Dataset, params: IndexParams) -> Result<LshIndex> {
    LshIndex::build(data, params)
}

/// The query with its address and projections in every table.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryContext {
    q: UnitVector,
    addresses: Vec<HashAddress>,
    projections: Vec<QueryProjections>,
}

impl QueryContext {
    pub fn vector(&self) -> &UnitVector {
        &self.q
    }

    /// `i^k`, the query's bucket in table `k`.
    pub fn address(&self, k: usize) -> HashAddress {
        self.addresses[k]
    }

    pub fn addresses(&self) -> &[HashAddress] {
        &self.addresses
    }

    pub fn projections(&self, k: usize) -> &QueryProjections {
        &self.projections[k]
    }
}

pub fn make_query_context(index: &LshIndex, q: &UnitVector) -> Result<QueryContext> {
    check_dim(index.dim, q.dim())?;
    let projections: Vec<QueryProjections> = index
        .tables
        .iter()
        .map(|t| t.planes.project_query(q))
        .collect::<Result<_>>()?;
    let addresses = projections.iter().map(QueryProjections::address).collect();
    Ok(QueryContext {
        q: q.clone(),
        addresses,
        projections,
    })
}
