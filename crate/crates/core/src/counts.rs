//! Bucket tables and exact counts structures.
//!
//! For an address `i` of a `t`-bit table:
//!
//! * the counts vector `C_i[r]` is the number of elements whose bucket is at
//!   hamming distance exactly `r` from `i`;
//! * the counts matrix `M_i[s][a]` restricts that count to buckets agreeing
//!   with `i` on bits `0..a`. Column 0 is the counts vector.
//!
//! Dense mode runs the hypercube recurrence once per column for all `2^t`
//! addresses. Sparse mode answers single addresses by scanning non-empty
//! buckets. [`AnchoredCounts`] is a per-query index over the non-empty buckets
//! that answers exactly the cells the sampler walk asks for in `O(log n)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hashing::{check_bits, low_mask, HashAddress};
use crate::probability::HammingSet;

/// Largest `t` for which dense counts may be precomputed.
pub const MAX_DENSE_BITS: u32 = 16;

/// One hash table: element ids grouped by bucket address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketTable {
    t: u32,
    buckets: BTreeMap<u32, Vec<u32>>,
    assignment: Vec<u32>,
}

impl BucketTable {
    /// Groups element `id` into bucket `addresses[id]`.
    pub fn from_assignment(t: u32, addresses: Vec<u32>) -> Result<Self> {
        check_bits(t)?;
        if addresses.len() > u32::MAX as usize {
            return Err(Error::config("more than 2^32 - 1 elements"));
        }
        let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (id, &addr) in addresses.iter().enumerate() {
            if addr & !low_mask(t) != 0 {
                return Err(Error::AddressOutOfRange { bits: addr, t });
            }
            buckets.entry(addr).or_default().push(id as u32);
        }
        Ok(BucketTable {
            t,
            buckets,
            assignment: addresses,
        })
    }

    /// Rebuilds a table from explicit non-empty buckets over `n` elements.
    /// Every id in `0..n` must appear exactly once.
    pub fn from_buckets(t: u32, n: usize, buckets: BTreeMap<u32, Vec<u32>>) -> Result<Self> {
        check_bits(t)?;
        const UNSET: u32 = u32::MAX;
        let mut assignment = vec![UNSET; n];
        for (&addr, ids) in &buckets {
            if addr & !low_mask(t) != 0 {
                return Err(Error::AddressOutOfRange { bits: addr, t });
            }
            if ids.is_empty() {
                return Err(Error::config("empty bucket listed"));
            }
            for &id in ids {
                let slot = assignment
                    .get_mut(id as usize)
                    .ok_or_else(|| Error::config(alloc::format!("element id {id} out of range")))?;
                if *slot != UNSET {
                    return Err(Error::config(alloc::format!("element id {id} listed twice")));
                }
                *slot = addr;
            }
        }
        if assignment.contains(&UNSET) {
            return Err(Error::config("element missing from table"));
        }
        Ok(BucketTable { t, buckets, assignment })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Element ids in bucket `addr`, empty if the bucket is empty.
    pub fn bucket(&self, addr: u32) -> &[u32] {
        self.buckets.get(&addr).map_or(&[], Vec::as_slice)
    }

    #[inline]
    pub fn bucket_size(&self, addr: u32) -> u64 {
        self.bucket(addr).len() as u64
    }

    /// Non-empty buckets in ascending address order.
    pub fn buckets(&self) -> impl ExactSizeIterator<Item = (u32, &[u32])> + '_ {
        self.buckets.iter().map(|(&a, ids)| (a, ids.as_slice()))
    }

    pub fn nonempty_buckets(&self) -> usize {
        self.buckets.len()
    }

    /// Bucket address of element `id`.
    pub fn address_of(&self, id: usize) -> HashAddress {
        HashAddress::new_unchecked(self.assignment[id], self.t)
    }

    /// Bucket sizes for all `2^t` addresses.
    pub fn dense_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; 1usize << self.t];
        for (&a, ids) in &self.buckets {
            sizes[a as usize] = ids.len() as u64;
        }
        sizes
    }
}

/// `C_i[0..=t]` for one address.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsVector(Vec<u64>);

impl CountsVector {
    pub fn new(entries: Vec<u64>) -> Self {
        CountsVector(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn t(&self) -> u32 {
        self.0.len() as u32 - 1
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// `C_i(I) = sum_{d in I} C_i[d]`.
    pub fn over_set(&self, set: &HammingSet) -> Result<u64> {
        set.check(self.t())?;
        Ok(set.iter().map(|d| self.0[d as usize]).sum())
    }
}

/// Free-function form of [`CountsVector::over_set`].
pub fn counts_over_set(cv: &CountsVector, set: &HammingSet) -> Result<u64> {
    cv.over_set(set)
}

/// `M_i[s][a]` for one address, `(t + 1) x (t + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsMatrix {
    t: u32,
    cells: Vec<u64>,
}

impl CountsMatrix {
    pub fn t(&self) -> u32 {
        self.t
    }

    #[inline]
    pub fn cell(&self, s: u32, a: u32) -> u64 {
        self.cells[(s * (self.t + 1) + a) as usize]
    }

    pub fn column(&self, a: u32) -> CountsVector {
        CountsVector((0..=self.t).map(|s| self.cell(s, a)).collect())
    }
}

/// Counts vectors for every address, flat `addr * (t + 1) + r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsVectors {
    t: u32,
    flat: Vec<u64>,
}

impl CountsVectors {
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn get(&self, addr: u32) -> &[u64] {
        let w = self.t as usize + 1;
        &self.flat[addr as usize * w..(addr as usize + 1) * w]
    }

    pub fn vector(&self, addr: u32) -> CountsVector {
        CountsVector(self.get(addr).to_vec())
    }
}

/// Runs the counts recurrence over the `t - a` free bits `a..t`, so that
/// only addresses sharing the low `a` bits interact. Output is flat
/// `addr * (t - a + 1) + r`.
fn aggregate_free_bits(sizes: &[u64], t: u32, a: u32) -> Result<Vec<u64>> {
    let tf = t - a;
    let w = tf as usize + 1;
    let len = sizes.len();
    let mut out = vec![0u64; len * w];
    for (addr, &b) in sizes.iter().enumerate() {
        out[addr * w] = b;
    }
    for r in 1..=tf as usize {
        for addr in 0..len {
            let mut sum = 0u64;
            for j in a..t {
                let nb = addr ^ (1usize << j);
                sum = sum
                    .checked_add(out[nb * w + r - 1])
                    .ok_or_else(|| Error::invariant("counts overflow"))?;
            }
            if r >= 2 {
                let back = (tf as u64 - r as u64 + 2) * out[addr * w + r - 2];
                sum = sum
                    .checked_sub(back)
                    .ok_or_else(|| Error::invariant("negative count in aggregation"))?;
            }
            if !sum.is_multiple_of(r as u64) {
                return Err(Error::invariant("inexact division in aggregation"));
            }
            out[addr * w + r] = sum / r as u64;
        }
    }
    Ok(out)
}

/// Counts vectors of every address of `table`, in `O(t^2 2^t)`.
pub fn aggregate_counts(table: &BucketTable) -> Result<CountsVectors> {
    let flat = aggregate_free_bits(&table.dense_sizes(), table.t, 0)?;
    Ok(CountsVectors { t: table.t, flat })
}

/// `C_addr` by scanning non-empty buckets.
pub fn counts_vector_sparse(table: &BucketTable, addr: HashAddress) -> Result<CountsVector> {
    check_table_t(table, addr)?;
    let mut c = vec![0u64; table.t as usize + 1];
    for (b, ids) in table.buckets() {
        c[(b ^ addr.bits()).count_ones() as usize] += ids.len() as u64;
    }
    Ok(CountsVector(c))
}

/// `M_addr` by scanning non-empty buckets.
pub fn counts_matrix_sparse(table: &BucketTable, addr: HashAddress) -> Result<CountsMatrix> {
    check_table_t(table, addr)?;
    let t = table.t;
    let mut cells = vec![0u64; ((t + 1) * (t + 1)) as usize];
    for (b, ids) in table.buckets() {
        let x = b ^ addr.bits();
        let s = x.count_ones();
        // Agrees on bits 0..a for every a up to the lowest differing bit.
        let max_a = x.trailing_zeros().min(t);
        for a in 0..=max_a {
            cells[(s * (t + 1) + a) as usize] += ids.len() as u64;
        }
    }
    Ok(CountsMatrix { t, cells })
}

fn check_table_t(table: &BucketTable, addr: HashAddress) -> Result<()> {
    if table.t == addr.t() {
        Ok(())
    } else {
        Err(Error::BitCountMismatch(table.t, addr.t()))
    }
}

/// Source of counts vectors and matrix cells for the sampler.
///
/// `matrix_cell(label, s, a)` is `M_label[s][a]`, and zero when
/// `s > t - a`.
pub trait CountsSource {
    fn t(&self) -> u32;
    fn counts_vector(&self, addr: u32) -> CountsVector;
    fn matrix_cell(&self, label: u32, s: u32, a: u32) -> u64;
}

impl<S: CountsSource + ?Sized> CountsSource for &S {
    fn t(&self) -> u32 {
        (**self).t()
    }

    fn counts_vector(&self, addr: u32) -> CountsVector {
        (**self).counts_vector(addr)
    }

    fn matrix_cell(&self, label: u32, s: u32, a: u32) -> u64 {
        (**self).matrix_cell(label, s, a)
    }
}

/// Precomputed matrices for all addresses. Column `a` is stored as
/// `2^t x (t - a + 1)`, so the total is about `t^2 2^(t-1)` integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseCounts {
    t: u32,
    columns: Vec<Vec<u64>>,
}

impl DenseCounts {
    pub fn build(table: &BucketTable) -> Result<Self> {
        if table.t > MAX_DENSE_BITS {
            return Err(Error::config(alloc::format!(
                "dense counts need t <= {MAX_DENSE_BITS}, got {}",
                table.t
            )));
        }
        let sizes = table.dense_sizes();
        let columns = (0..=table.t)
            .map(|a| aggregate_free_bits(&sizes, table.t, a))
            .collect::<Result<_>>()?;
        Ok(DenseCounts { t: table.t, columns })
    }

    pub fn vectors(&self) -> CountsVectors {
        CountsVectors {
            t: self.t,
            flat: self.columns[0].clone(),
        }
    }

    pub fn matrix(&self, addr: HashAddress) -> Result<CountsMatrix> {
        if addr.t() != self.t {
            return Err(Error::BitCountMismatch(self.t, addr.t()));
        }
        let t = self.t;
        let mut cells = vec![0u64; ((t + 1) * (t + 1)) as usize];
        for s in 0..=t {
            for a in 0..=t {
                cells[(s * (t + 1) + a) as usize] = self.matrix_cell(addr.bits(), s, a);
            }
        }
        Ok(CountsMatrix { t, cells })
    }
}

impl CountsSource for DenseCounts {
    fn t(&self) -> u32 {
        self.t
    }

    fn counts_vector(&self, addr: u32) -> CountsVector {
        let w = self.t as usize + 1;
        CountsVector(self.columns[0][addr as usize * w..(addr as usize + 1) * w].to_vec())
    }

    #[inline]
    fn matrix_cell(&self, label: u32, s: u32, a: u32) -> u64 {
        let w = self.t - a + 1;
        if s >= w {
            return 0;
        }
        self.columns[a as usize][(label * w + s) as usize]
    }
}

/// Scan-per-request provider. Correct for any label; `O(#buckets)` per cell.
#[derive(Debug, Clone, Copy)]
pub struct SparseCounts<'a>(pub &'a BucketTable);

impl CountsSource for SparseCounts<'_> {
    fn t(&self) -> u32 {
        self.0.t
    }

    fn counts_vector(&self, addr: u32) -> CountsVector {
        let mut c = vec![0u64; self.0.t as usize + 1];
        for (b, ids) in self.0.buckets() {
            c[(b ^ addr).count_ones() as usize] += ids.len() as u64;
        }
        CountsVector(c)
    }

    fn matrix_cell(&self, label: u32, s: u32, a: u32) -> u64 {
        let mask = low_mask(a);
        self.0
            .buckets()
            .filter(|&(b, _)| (b ^ label) & mask == 0 && (b ^ label).count_ones() == s)
            .map(|(_, ids)| ids.len() as u64)
            .sum()
    }
}

/// Per-query index over one table's non-empty buckets, keyed by the offset
/// `x = b ^ anchor`.
///
/// The sampler only asks for `M_l[s][a]` with labels `l` that agree with the
/// anchor on bits `a..t`. For such a label, with `P` the low `a` bits of
/// `l ^ anchor`, the buckets counted are those whose offset has low bits
/// equal to `P` and popcount `s + popcount(P)`. Offsets are grouped by
/// popcount and sorted by their bit-reversal, which turns "low `a` bits equal
/// `P`" into a contiguous range; prefix sums then give each cell by binary
/// search. Other labels fall back to a scan.
#[derive(Debug, Clone)]
pub struct AnchoredCounts<'a> {
    table: &'a BucketTable,
    anchor: u32,
    /// Per popcount: sorted reversed offsets and prefix sums of sizes.
    keys: Vec<Vec<u32>>,
    prefix: Vec<Vec<u64>>,
}

impl<'a> AnchoredCounts<'a> {
    pub fn new(table: &'a BucketTable, anchor: HashAddress) -> Result<Self> {
        check_table_t(table, anchor)?;
        let t = table.t as usize;
        let mut groups: Vec<Vec<(u32, u64)>> = vec![Vec::new(); t + 1];
        for (b, ids) in table.buckets() {
            let x = b ^ anchor.bits();
            groups[x.count_ones() as usize].push((x.reverse_bits(), ids.len() as u64));
        }
        let mut keys = Vec::with_capacity(t + 1);
        let mut prefix = Vec::with_capacity(t + 1);
        for mut g in groups {
            g.sort_unstable_by_key(|&(k, _)| k);
            let mut p = Vec::with_capacity(g.len() + 1);
            p.push(0u64);
            let mut acc = 0;
            for &(_, size) in &g {
                acc += size;
                p.push(acc);
            }
            keys.push(g.into_iter().map(|(k, _)| k).collect());
            prefix.push(p);
        }
        Ok(AnchoredCounts {
            table,
            anchor: anchor.bits(),
            keys,
            prefix,
        })
    }

    fn range_sum(&self, w: usize, lo: u64, hi: u64) -> u64 {
        let keys = &self.keys[w];
        let start = keys.partition_point(|&k| (k as u64) < lo);
        let end = keys.partition_point(|&k| (k as u64) < hi);
        self.prefix[w][end] - self.prefix[w][start]
    }
}

impl CountsSource for AnchoredCounts<'_> {
    fn t(&self) -> u32 {
        self.table.t
    }

    fn counts_vector(&self, addr: u32) -> CountsVector {
        if addr == self.anchor {
            CountsVector(self.prefix.iter().map(|p| *p.last().unwrap_or(&0)).collect())
        } else {
            SparseCounts(self.table).counts_vector(addr)
        }
    }

    fn matrix_cell(&self, label: u32, s: u32, a: u32) -> u64 {
        let t = self.table.t;
        let diff = label ^ self.anchor;
        if diff & !low_mask(a) != 0 {
            return SparseCounts(self.table).matrix_cell(label, s, a);
        }
        if s > t - a {
            return 0;
        }
        let w = (s + diff.count_ones()) as usize;
        if w > t as usize {
            return 0;
        }
        let lo = diff.reverse_bits() as u64;
        let span = 1u64 << (32 - a);
        self.range_sum(w, lo, lo + span)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Sizes "00" -> 1, "01" -> 2, "10" -> 3, "11" -> 4, strings in plane order.
    fn small_table() -> BucketTable {
        let mut a = vec![0b00];
        a.extend([0b10; 2]);
        a.extend([0b01; 3]);
        a.extend([0b11; 4]);
        BucketTable::from_assignment(2, a).unwrap()
    }

    fn random_table(seed: u64, t: u32, n: usize) -> BucketTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Skewed so some buckets are large and many are empty.
        let hot: Vec<u32> = (0..4).map(|_| rng.random_range(0..1u32 << t)).collect();
        let addrs = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    hot[rng.random_range(0..4)]
                } else {
                    rng.random_range(0..1u32 << t)
                }
            })
            .collect();
        BucketTable::from_assignment(t, addrs).unwrap()
    }

    // Double loop over all address pairs.
    fn brute_vector(table: &BucketTable, addr: u32) -> Vec<u64> {
        let mut c = vec![0u64; table.t() as usize + 1];
        for b in 0..1u32 << table.t() {
            c[(addr ^ b).count_ones() as usize] += table.bucket_size(b);
        }
        c
    }

    fn brute_cell(table: &BucketTable, addr: u32, s: u32, a: u32) -> u64 {
        (0..1u32 << table.t())
            .filter(|&b| (addr ^ b).count_ones() == s && (addr ^ b) & low_mask(a) == 0)
            .map(|b| table.bucket_size(b))
            .sum()
    }

    #[test]
    fn table_basics() {
        let t = small_table();
        assert_eq!(t.n(), 10);
        assert_eq!(t.bucket(0b01), &[3, 4, 5]);
        assert_eq!(t.bucket_size(0b11), 4);
        assert_eq!(t.address_of(9).bits(), 0b11);
        assert_eq!(t.dense_sizes(), vec![1, 3, 2, 4]);
        assert!(BucketTable::from_assignment(2, vec![4]).is_err());
        let rebuilt = BucketTable::from_buckets(2, 10, t.buckets.clone()).unwrap();
        assert_eq!(rebuilt, t);
        let mut bad = t.buckets.clone();
        bad.get_mut(&0).unwrap().push(1);
        assert!(BucketTable::from_buckets(2, 10, bad).is_err());
        assert!(BucketTable::from_buckets(2, 11, t.buckets.clone()).is_err());
    }

    #[test]
    fn aggregate_small_example() {
        let cv = aggregate_counts(&small_table()).unwrap();
        assert_eq!(cv.get(0b00), &[1, 5, 4]);
        assert_eq!(cv.get(0b11), &[4, 5, 1]);
        let sparse = counts_vector_sparse(&small_table(), HashAddress::new(0, 2).unwrap()).unwrap();
        assert_eq!(sparse.entries(), &[1, 5, 4]);
    }

    #[test]
    fn matrix_small_example() {
        let table = small_table();
        let addr = HashAddress::new(0, 2).unwrap();
        let m = counts_matrix_sparse(&table, addr).unwrap();
        assert_eq!(m.cell(1, 1), 2);
        assert_eq!(m.column(0).entries(), &[1, 5, 4]);
        for a in 0..=2 {
            assert_eq!(m.cell(0, a), 1);
        }
        assert_eq!(DenseCounts::build(&table).unwrap().matrix(addr).unwrap(), m);
    }

    #[test]
    fn empty_and_one_hot_tables() {
        let empty = BucketTable::from_assignment(3, vec![]).unwrap();
        let cv = aggregate_counts(&empty).unwrap();
        assert!((0..8).all(|a| cv.get(a).iter().all(|&c| c == 0)));
        let one = BucketTable::from_assignment(3, vec![0b101]).unwrap();
        let cv = aggregate_counts(&one).unwrap();
        assert_eq!(cv.get(0b101), &[1, 0, 0, 0]);
        for j in 0..8u32 {
            let d = (j ^ 0b101).count_ones() as usize;
            let mut expect = [0u64; 4];
            expect[d] = 1;
            assert_eq!(cv.get(j), &expect);
        }
        let own_empty = counts_vector_sparse(&one, HashAddress::new(0, 3).unwrap()).unwrap();
        assert_eq!(own_empty.entries()[0], 0);
    }

    #[test]
    fn counts_over_set_examples() {
        let cv = CountsVector::new(vec![1, 5, 4]);
        assert_eq!(counts_over_set(&cv, &HammingSet::full(2)).unwrap(), 10);
        assert_eq!(counts_over_set(&cv, &HammingSet::threshold(1)).unwrap(), 6);
        assert_eq!(counts_over_set(&cv, &HammingSet::new(vec![2]).unwrap()).unwrap(), 4);
        assert!(counts_over_set(&cv, &HammingSet::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn dense_mode_is_capped() {
        let t = BucketTable::from_assignment(17, vec![0]).unwrap();
        assert!(DenseCounts::build(&t).is_err());
    }

    #[test]
    fn anchored_matches_sparse_on_walk_labels() {
        let table = random_table(3, 9, 300);
        let anchor = HashAddress::new(0b1_0110_0101, 9).unwrap();
        let fast = AnchoredCounts::new(&table, anchor).unwrap();
        let slow = SparseCounts(&table);
        assert_eq!(fast.counts_vector(anchor.bits()), slow.counts_vector(anchor.bits()));
        for a in 0..=9u32 {
            for p in 0..1u32 << a {
                let label = anchor.bits() ^ p;
                for s in 0..=9 {
                    assert_eq!(fast.matrix_cell(label, s, a), slow.matrix_cell(label, s, a));
                }
            }
        }
        // Labels off the anchor's subcube use the fallback.
        assert_eq!(
            fast.matrix_cell(!anchor.bits() & 0x1ff, 2, 3),
            slow.matrix_cell(!anchor.bits() & 0x1ff, 2, 3)
        );
    }

    proptest! {
        #[test]
        fn aggregate_matches_double_loop(seed in any::<u64>(), t in 1u32..=8, n in 0usize..200) {
            let table = random_table(seed, t, n);
            let cv = aggregate_counts(&table).unwrap();
            for addr in 0..1u32 << t {
                let brute = brute_vector(&table, addr);
                prop_assert_eq!(cv.get(addr), brute.as_slice());
                prop_assert_eq!(cv.get(addr).iter().sum::<u64>(), n as u64);
                prop_assert_eq!(cv.get(addr)[0], table.bucket_size(addr));
            }
        }

        #[test]
        fn sparse_vector_matches_dense(seed in any::<u64>(), t in 1u32..=10, n in 0usize..400) {
            let table = random_table(seed, t, n);
            let cv = aggregate_counts(&table).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            for _ in 0..50 {
                let a = rng.random_range(0..1u32 << t);
                let sparse = counts_vector_sparse(&table, HashAddress::new(a, t).unwrap()).unwrap();
                prop_assert_eq!(sparse.entries(), cv.get(a));
            }
        }

        #[test]
        fn matrix_modes_agree(seed in any::<u64>(), t in 1u32..=8, n in 0usize..200) {
            let table = random_table(seed, t, n);
            let dense = DenseCounts::build(&table).unwrap();
            for addr in 0..1u32 << t {
                let h = HashAddress::new(addr, t).unwrap();
                let m = dense.matrix(h).unwrap();
                prop_assert_eq!(&m, &counts_matrix_sparse(&table, h).unwrap());
                for s in 0..=t {
                    prop_assert_eq!(m.cell(s, t), if s == 0 { table.bucket_size(addr) } else { 0 });
                }
            }
        }

        #[test]
        fn matrix_matches_definition(seed in any::<u64>(), t in 1u32..=6, n in 0usize..100) {
            let table = random_table(seed, t, n);
            let dense = DenseCounts::build(&table).unwrap();
            for addr in 0..1u32 << t {
                for s in 0..=t {
                    for a in 0..=t {
                        prop_assert_eq!(dense.matrix_cell(addr, s, a), brute_cell(&table, addr, s, a));
                    }
                }
            }
        }

        #[test]
        fn matrix_tree_consistency(seed in any::<u64>(), t in 1u32..=8, n in 0usize..200) {
            // Buckets agreeing on bits 0..a split on bit a.
            let table = random_table(seed, t, n);
            let dense = DenseCounts::build(&table).unwrap();
            for addr in 0..1u32 << t {
                for a in 0..t {
                    for s in 0..=t {
                        let keep = dense.matrix_cell(addr, s, a + 1);
                        let flip = if s == 0 { 0 } else { dense.matrix_cell(addr ^ 1 << a, s - 1, a + 1) };
                        prop_assert_eq!(dense.matrix_cell(addr, s, a), keep + flip);
                    }
                }
            }
        }
    }
}
