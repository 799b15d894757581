//! Uniform sampling from the multiset union of buckets at hamming distances
//! `I` from the query, across all tables.
//!
//! A draw picks table `k` with weight `C^k_q(I)`, a distance `d in I` with
//! weight `C^k_q[d]`, walks the bit tree to a bucket at distance `d` with
//! probability proportional to its size, and finally picks an element of
//! that bucket uniformly. Every element occurrence is therefore drawn with
//! probability `1 / sum_k C^k_q(I)`. All odds are integer counts, so the
//! choices are exact.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::Rng;

use crate::counts::{BucketTable, CountsSource, CountsVector};
use crate::error::{Error, Result};
use crate::hashing::HashAddress;
use crate::index::{LshIndex, QueryContext};
use crate::probability::HammingSet;

/// One sampled element occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleDraw {
    pub element_id: u32,
    pub table: usize,
    pub bucket: HashAddress,
    pub distance: u32,
}

/// Unbiased integer in `0..n` by rejection.
#[inline]
fn below<R: Rng + ?Sized>(rng: &mut R, n: u64) -> Result<u64> {
    Uniform::new(0, n)
        .map(|u| u.sample(rng))
        .map_err(|_| Error::EmptySupport)
}

/// Index `j` with probability `weights[j] / sum(weights)`.
fn pick_weighted<R: Rng + ?Sized>(weights: impl Iterator<Item = u64> + Clone, rng: &mut R) -> Result<usize> {
    let total: u64 = weights.clone().sum();
    if total == 0 {
        return Err(Error::EmptySupport);
    }
    let mut u = below(rng, total)?;
    for (j, w) in weights.enumerate() {
        if u < w {
            return Ok(j);
        }
        u -= w;
    }
    Err(Error::invariant("weighted pick ran past the total"))
}

/// Table `k` with probability `counts[k] / sum(counts)`.
pub fn select_table<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Result<usize> {
    pick_weighted(counts.iter().copied(), rng)
}

/// Distance `d in I` with probability `cv[d] / C(I)`.
pub fn select_distance<R: Rng + ?Sized>(cv: &CountsVector, set: &HammingSet, rng: &mut R) -> Result<u32> {
    set.check(cv.t())?;
    let e = cv.entries();
    let j = pick_weighted(set.iter().map(|d| e[d as usize]), rng)?;
    Ok(set.distances()[j])
}

/// Bucket at distance `d` from `addr`, chosen with probability
/// `size(b) / C_addr[d]` by walking bits `0..t` and flipping bit `r` with
/// odds given by the two children's counts.
pub fn hamming_distance_sample<S, R>(src: &S, addr: HashAddress, d: u32, rng: &mut R) -> Result<HashAddress>
where
    S: CountsSource + ?Sized,
    R: Rng + ?Sized,
{
    let t = src.t();
    check_walk(src, addr, d)?;
    let mut mask = 0u32;
    let mut g = 0u32;
    for r in 0..t {
        if g == d {
            break;
        }
        let (left, right) = children(src, addr.bits() ^ mask, r, d - g);
        let total = left + right;
        if total == 0 {
            return Err(Error::invariant("zero count on sampler path"));
        }
        if below(rng, total)? < right {
            g += 1;
            mask ^= 1 << r;
        }
    }
    if g != d {
        return Err(Error::invariant("sampler walk ended at the wrong distance"));
    }
    Ok(HashAddress::new_unchecked(addr.bits() ^ mask, t))
}

fn check_walk<S: CountsSource + ?Sized>(src: &S, addr: HashAddress, d: u32) -> Result<()> {
    let t = src.t();
    if addr.t() != t {
        return Err(Error::BitCountMismatch(t, addr.t()));
    }
    if d > t {
        return Err(Error::DistanceOutOfRange { distance: d, t });
    }
    if src.matrix_cell(addr.bits(), d, 0) == 0 {
        return Err(Error::EmptySupport);
    }
    Ok(())
}

/// Counts of the keep (`left`) and flip (`right`) subtrees at round `r`,
/// with `rem` flips still to place.
#[inline]
fn children<S: CountsSource + ?Sized>(src: &S, label: u32, r: u32, rem: u32) -> (u64, u64) {
    let right = src.matrix_cell(label ^ 1 << r, rem - 1, r + 1);
    let left = src.matrix_cell(label, rem, r + 1);
    (left, right)
}

/// Probability that [`hamming_distance_sample`] returns `bucket`, as the
/// product of the per-round odds along its path.
pub fn walk_probability<S: CountsSource + ?Sized>(
    src: &S,
    addr: HashAddress,
    d: u32,
    bucket: HashAddress,
) -> Result<f64> {
    check_walk(src, addr, d)?;
    let target = addr.bits() ^ bucket.bits();
    if target.count_ones() != d {
        return Ok(0.0);
    }
    let mut p = 1.0;
    let mut mask = 0u32;
    let mut g = 0u32;
    for r in 0..src.t() {
        if g == d {
            break;
        }
        let (left, right) = children(src, addr.bits() ^ mask, r, d - g);
        let total = (left + right) as f64;
        let (taken, flip) = if target >> r & 1 == 1 {
            (right, true)
        } else {
            (left, false)
        };
        if taken == 0 {
            return Ok(0.0);
        }
        p *= taken as f64 / total;
        if flip {
            g += 1;
            mask ^= 1 << r;
        }
    }
    Ok(p)
}

/// Sampling state for one table and query.
pub struct TableSampler<'a> {
    buckets: &'a BucketTable,
    source: Box<dyn CountsSource + 'a>,
    anchor: HashAddress,
    counts: CountsVector,
    weight: u64,
}

impl<'a> TableSampler<'a> {
    pub fn new(
        buckets: &'a BucketTable,
        source: Box<dyn CountsSource + 'a>,
        anchor: HashAddress,
        set: &HammingSet,
    ) -> Result<Self> {
        let counts = source.counts_vector(anchor.bits());
        let weight = counts.over_set(set)?;
        Ok(TableSampler {
            buckets,
            source,
            anchor,
            counts,
            weight,
        })
    }

    /// `C^k_q`.
    pub fn counts(&self) -> &CountsVector {
        &self.counts
    }

    /// `C^k_q(I)`.
    pub fn weight(&self) -> u64 {
        self.weight
    }
}

/// Draws from `B_q(I)` over all tables of an index.
pub struct Sampler<'a> {
    tables: Vec<TableSampler<'a>>,
    set: HammingSet,
    total: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(tables: Vec<TableSampler<'a>>, set: HammingSet) -> Self {
        let total = tables.iter().map(|t| t.weight).sum();
        Sampler { tables, set, total }
    }

    /// Sampler over every table of `index` for the query in `ctx`.
    pub fn for_query(index: &'a LshIndex, ctx: &QueryContext, set: &HammingSet) -> Result<Self> {
        set.check(index.t())?;
        let tables = index
            .tables()
            .iter()
            .enumerate()
            .map(|(k, table)| {
                let anchor = ctx.address(k);
                TableSampler::new(table.buckets(), table.counts_source(anchor)?, anchor, set)
            })
            .collect::<Result<_>>()?;
        Ok(Self::new(tables, set.clone()))
    }

    /// `sum_k C^k_q(I)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tables(&self) -> &[TableSampler<'a>] {
        &self.tables
    }

    pub fn set(&self) -> &HammingSet {
        &self.set
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SampleDraw> {
        let k = pick_weighted(self.tables.iter().map(|t| t.weight), rng)?;
        let ts = &self.tables[k];
        let d = select_distance(&ts.counts, &self.set, rng)?;
        let bucket = hamming_distance_sample(&*ts.source, ts.anchor, d, rng)?;
        let ids = ts.buckets.bucket(bucket.bits());
        if ids.is_empty() {
            return Err(Error::invariant("sampler reached an empty bucket"));
        }
        let element_id = ids[below(rng, ids.len() as u64)? as usize];
        Ok(SampleDraw {
            element_id,
            table: k,
            bucket,
            distance: d,
        })
    }
}

/// One draw for the query in `ctx`. Builds a [`Sampler`] each call; reuse
/// one for repeated draws.
pub fn draw_sample<R: Rng + ?Sized>(
    index: &LshIndex,
    ctx: &QueryContext,
    set: &HammingSet,
    rng: &mut R,
) -> Result<SampleDraw> {
    Sampler::for_query(index, ctx, set)?.draw(rng)
}
