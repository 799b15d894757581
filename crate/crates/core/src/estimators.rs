//! Range-count estimators, probing sequences, median-of-means and the
//! resource planner.
//!
//! * [`lsh_count`] samples occurrences from buckets at hamming distances `I`
//!   and scores a hit `x in A_q` as `sum_k C^k_q(I) / (K p(x))`.
//! * [`multi_probe_count`] scans ranked buckets and scores each hit
//!   `1 / sum_k p^k_m(x)`, where `p^k_m(x)` is the probability, at the hit's
//!   true angle, of landing in one of table `k`'s probed buckets.
//! * [`spring_baseline`] enumerates the query's own bucket in every table.
//! * [`multiprobe_baseline`] counts distinct hits in the probed buckets.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::time::Duration;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{AngleRange, Dataset};
use crate::hashing::HashAddress;
use crate::index::{LshIndex, QueryContext};
use crate::probability::{
    hamming_cdf_over_set, hamming_pmf, min_collision_prob, BitFlipProfile, HammingSet, DEFAULT_GRID,
};
use crate::sampler::Sampler;

/// Default ranking angle for probing, 45 degrees.
pub const DEFAULT_THETA_REP: f64 = PI / 4.0;

/// Result of one estimator run, or of a median over groups.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateReport {
    pub estimate: f64,
    pub samples_used: u64,
    pub elements_inspected: u64,
    /// Per-group estimates; a single entry for an ungrouped run.
    pub group_estimates: Vec<f64>,
    /// No element occurrence was available to sample.
    pub empty_support: bool,
    /// Filled in by callers that have a clock.
    pub elapsed: Option<Duration>,
}

impl EstimateReport {
    fn single(estimate: f64, samples_used: u64, elements_inspected: u64, empty_support: bool) -> Self {
        EstimateReport {
            estimate,
            samples_used,
            elements_inspected,
            group_estimates: vec![estimate],
            empty_support,
            elapsed: None,
        }
    }
}

fn check_query(index: &LshIndex, data: &Dataset, ctx: &QueryContext) -> Result<()> {
    index.check_dataset(data)?;
    if ctx.addresses().len() != index.k() {
        return Err(Error::config("query context was built for a different index"));
    }
    Ok(())
}

/// Importance weight `1 / p(x)` with `p(x) = P(d_qx in I | theta)`.
fn inverse_collision(t: u32, theta: f64, set: &HammingSet) -> Result<f64> {
    let p = hamming_cdf_over_set(t, theta, set)?;
    if p <= 0.0 {
        return Err(Error::invariant("sampled element has zero collision probability"));
    }
    Ok(1.0 / p)
}

/// LSH Count: mean of `samples` importance-weighted draws from `B_q(I)`.
pub fn lsh_count<R: Rng + ?Sized>(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
    set: &HammingSet,
    samples: u64,
    rng: &mut R,
) -> Result<EstimateReport> {
    check_query(index, data, ctx)?;
    if samples == 0 {
        return Err(Error::config("sample budget must be at least 1"));
    }
    let sampler = Sampler::for_query(index, ctx, set)?;
    lsh_count_with(&sampler, index, data, ctx, range, samples, rng)
}

/// [`lsh_count`] over a prepared sampler.
pub fn lsh_count_with<R: Rng + ?Sized>(
    sampler: &Sampler<'_>,
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
    samples: u64,
    rng: &mut R,
) -> Result<EstimateReport> {
    let total = sampler.total();
    if total == 0 {
        return Ok(EstimateReport::single(0.0, 0, 0, true));
    }
    let set = sampler.set();
    let scale = total as f64 / index.k() as f64;
    let mut sum = 0.0;
    for _ in 0..samples {
        let draw = sampler.draw(rng)?;
        let theta = data.angle_to(ctx.vector(), draw.element_id as usize);
        if range.contains(theta) {
            sum += scale * inverse_collision(index.t(), theta, set)?;
        }
    }
    Ok(EstimateReport::single(sum / samples as f64, samples, samples, false))
}

/// Exact expectation of one LSH Count sample given the tables: the
/// weighted sum over every occurrence in `B_q(I)`.
pub fn lsh_count_exhaustive(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
    set: &HammingSet,
) -> Result<EstimateReport> {
    check_query(index, data, ctx)?;
    set.check(index.t())?;
    let k = index.k() as f64;
    let mut sum = 0.0;
    let mut inspected = 0u64;
    for (kk, table) in index.tables().iter().enumerate() {
        let q = ctx.address(kk).bits();
        for (b, ids) in table.buckets().buckets() {
            if !set.contains((b ^ q).count_ones()) {
                continue;
            }
            for &id in ids {
                inspected += 1;
                let theta = data.angle_to(ctx.vector(), id as usize);
                if range.contains(theta) {
                    sum += inverse_collision(index.t(), theta, set)? / k;
                }
            }
        }
    }
    Ok(EstimateReport::single(sum, 0, inspected, inspected == 0))
}

/// Hamming-0 enumeration: every occurrence in the query's own bucket scores
/// `1 / (K (1 - theta/pi)^t)`.
pub fn spring_baseline(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
) -> Result<EstimateReport> {
    check_query(index, data, ctx)?;
    let t = index.t();
    let k = index.k() as f64;
    let mut sum = 0.0;
    let mut inspected = 0u64;
    for (kk, table) in index.tables().iter().enumerate() {
        for &id in table.buckets().bucket(ctx.address(kk).bits()) {
            inspected += 1;
            let theta = data.angle_to(ctx.vector(), id as usize);
            if range.contains(theta) {
                let p0 = libm::pow(1.0 - theta / PI, t as f64);
                if p0 <= 0.0 {
                    return Err(Error::invariant("query bucket holds an antipodal element"));
                }
                sum += 1.0 / (k * p0);
            }
        }
    }
    Ok(EstimateReport::single(sum, 0, inspected, inspected == 0))
}

/// `W = (1/K) sum_k sum_{x in truth} 1(d^k_qx in I) / p(x)` for one table
/// realization, and its relative deviation from `|truth|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasDiagnostic {
    pub w: f64,
    pub truth_count: usize,
    pub relative_bias: f64,
}

pub fn diagnose_bias(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    set: &HammingSet,
    truth: &[usize],
) -> Result<BiasDiagnostic> {
    check_query(index, data, ctx)?;
    set.check(index.t())?;
    if truth.is_empty() {
        return Err(Error::EmptyTruthSet);
    }
    let mut w = 0.0;
    for &id in truth {
        let theta = data.angle_to(ctx.vector(), id);
        let inv = inverse_collision(index.t(), theta, set)?;
        for (kk, table) in index.tables().iter().enumerate() {
            let d = (table.buckets().address_of(id).bits() ^ ctx.address(kk).bits()).count_ones();
            if set.contains(d) {
                w += inv;
            }
        }
    }
    let w = w / index.k() as f64;
    let n = truth.len() as f64;
    Ok(BiasDiagnostic {
        w,
        truth_count: truth.len(),
        relative_bias: (w / n - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Copy)]
struct ProbeNode {
    key: f64,
    addr: u32,
    /// Flips relative to the most likely bucket.
    mask: u32,
    /// Position in the ranked bit order of the last added bit, -1 for none.
    last: i32,
}

impl PartialEq for ProbeNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ProbeNode {}

impl PartialOrd for ProbeNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProbeNode {
    // Max-heap: higher probability first, then lower address.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| other.addr.cmp(&self.addr))
    }
}

/// Lazily yields buckets of one table in nonincreasing probability order.
///
/// Probabilities are relative to the most likely bucket, which flips every
/// bit with `p_j > 1/2`. From there each further flip `j` scales the
/// probability by `min(p_j, 1 - p_j) / max(p_j, 1 - p_j) <= 1`. Flip sets over
/// bits ranked by that ratio are generated best-first with the shift/expand
/// successor rule, which reaches every subset exactly once and never yields
/// a child more likely than its parent. Keys are the directly computed
/// bucket probabilities, capped by the parent's key so that rounding cannot
/// reorder the output. Buckets with exactly equal keys come out in
/// ascending address order.
#[derive(Debug, Clone)]
pub struct ProbeIter {
    profile: BitFlipProfile,
    query: u32,
    base: u32,
    order: Vec<u32>,
    heap: BinaryHeap<ProbeNode>,
    pending: VecDeque<(u32, f64)>,
}

impl ProbeIter {
    pub fn new(profile: BitFlipProfile, query: HashAddress) -> Result<Self> {
        if profile.t() != query.t() {
            return Err(Error::BitCountMismatch(profile.t(), query.t()));
        }
        let probs = profile.probs();
        let base = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.5)
            .fold(0u32, |m, (j, _)| m | 1 << j);
        let ratio = |j: u32| {
            let p = probs[j as usize];
            let (lo, hi) = if p <= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
            lo / hi
        };
        let mut order: Vec<u32> = (0..profile.t()).collect();
        order.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)).then(a.cmp(&b)));
        let root = ProbeNode {
            key: profile.flip_set_prob(base),
            addr: query.bits() ^ base,
            mask: 0,
            last: -1,
        };
        let mut heap = BinaryHeap::new();
        heap.push(root);
        Ok(ProbeIter {
            profile,
            query: query.bits(),
            base,
            order,
            heap,
            pending: VecDeque::new(),
        })
    }

    fn node(&self, mask: u32, last: i32, cap: f64) -> ProbeNode {
        let flips = self.base ^ mask;
        ProbeNode {
            key: self.profile.flip_set_prob(flips).min(cap),
            addr: self.query ^ flips,
            mask,
            last,
        }
    }

    fn expand(&mut self, n: ProbeNode) {
        let next = (n.last + 1) as usize;
        if next >= self.order.len() {
            return;
        }
        let bit = 1u32 << self.order[next];
        let expand = self.node(n.mask | bit, next as i32, n.key);
        self.heap.push(expand);
        if n.last >= 0 {
            let prev = 1u32 << self.order[n.last as usize];
            let shift = self.node((n.mask ^ prev) | bit, next as i32, n.key);
            self.heap.push(shift);
        }
    }
}

impl Iterator for ProbeIter {
    type Item = (HashAddress, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pending.is_empty() {
            let top = self.heap.pop()?;
            let key = top.key;
            let mut batch = vec![(top.addr, key)];
            self.expand(top);
            while self.heap.peek().is_some_and(|n| n.key == key) {
                let n = self.heap.pop().expect("peeked");
                batch.push((n.addr, key));
                self.expand(n);
            }
            batch.sort_unstable_by_key(|&(a, _)| a);
            self.pending.extend(batch);
        }
        let t = self.profile.t();
        self.pending
            .pop_front()
            .map(|(a, p)| (HashAddress::new_unchecked(a, t), p))
    }
}

/// The `b` most likely buckets (all `2^t` if `b` is larger).
pub fn probing_sequence(profile: &BitFlipProfile, query: HashAddress, b: u64) -> Result<Vec<(HashAddress, f64)>> {
    if b == 0 {
        return Err(Error::config("probe count must be at least 1"));
    }
    let all = 1u64 << profile.t();
    Ok(ProbeIter::new(profile.clone(), query)?
        .take(b.min(all) as usize)
        .collect())
}

/// How many buckets to probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeBudget {
    /// The top `B` buckets of each table.
    PerTable(u64),
    /// Whole buckets, best first across all tables, until at least this many
    /// element occurrences have been inspected.
    Global(u64),
    /// Every bucket of every table.
    All,
}

/// Probed buckets of one table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableProbes {
    /// `(address, probability at theta_rep)`, nonincreasing.
    pub buckets: Vec<(HashAddress, f64)>,
    /// Every address of the table is probed, including empty buckets.
    pub complete: bool,
}

/// Probed buckets for every table of one query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeSet {
    pub tables: Vec<TableProbes>,
    /// Element occurrences in the probed buckets.
    pub inspected: u64,
}

impl ProbeSet {
    /// Probability mass at `theta_rep` covered in table `k`.
    pub fn cumulative(&self, k: usize) -> f64 {
        let t = &self.tables[k];
        if t.complete {
            1.0
        } else {
            t.buckets.iter().map(|(_, p)| p).sum()
        }
    }
}

/// Ranks buckets at `theta_rep` and selects them under `budget`.
///
/// With a global budget, buckets from all tables are merged by probability
/// (ties to the lower table index, then the lower address). A bucket is
/// taken whole while fewer than `budget` occurrences have been inspected, so
/// the last bucket may overshoot. Empty buckets cost nothing but stay in
/// the probe set, since they still add to the collision probability.
pub fn plan_probes(index: &LshIndex, ctx: &QueryContext, theta_rep: f64, budget: ProbeBudget) -> Result<ProbeSet> {
    if !(theta_rep > 0.0 && theta_rep < PI) {
        return Err(Error::InvalidAngle(theta_rep));
    }
    let k = index.k();
    let iters = (0..k)
        .map(|kk| {
            let profile = BitFlipProfile::new(theta_rep, ctx.projections(kk))?;
            ProbeIter::new(profile, ctx.address(kk))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = ProbeSet {
        tables: vec![TableProbes::default(); k],
        inspected: 0,
    };
    match budget {
        ProbeBudget::PerTable(b) => {
            if b == 0 {
                return Err(Error::config("probe count must be at least 1"));
            }
            let all = 1u64 << index.t();
            for (kk, it) in iters.into_iter().enumerate() {
                let buckets: Vec<_> = it.take(b.min(all) as usize).collect();
                set.inspected += buckets
                    .iter()
                    .map(|(a, _)| index.table(kk).buckets().bucket_size(a.bits()))
                    .sum::<u64>();
                set.tables[kk] = TableProbes {
                    buckets,
                    complete: b >= all,
                };
            }
        }
        ProbeBudget::All => {
            for (kk, it) in iters.into_iter().enumerate() {
                let table = index.table(kk).buckets();
                let profile = &it.profile;
                let q = ctx.address(kk).bits();
                let mut buckets: Vec<_> = table
                    .buckets()
                    .map(|(a, _)| (HashAddress::new_unchecked(a, index.t()), profile.flip_set_prob(a ^ q)))
                    .collect();
                buckets.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
                set.inspected += table.n() as u64;
                set.tables[kk] = TableProbes {
                    buckets,
                    complete: true,
                };
            }
        }
        ProbeBudget::Global(limit) => {
            #[derive(PartialEq)]
            struct Head(f64, usize, u32);
            impl Eq for Head {}
            impl PartialOrd for Head {
                fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                    Some(self.cmp(o))
                }
            }
            impl Ord for Head {
                fn cmp(&self, o: &Self) -> Ordering {
                    self.0
                        .total_cmp(&o.0)
                        .then_with(|| o.1.cmp(&self.1))
                        .then_with(|| o.2.cmp(&self.2))
                }
            }
            let mut iters = iters;
            let mut heap = BinaryHeap::new();
            for (kk, it) in iters.iter_mut().enumerate() {
                if let Some((a, p)) = it.next() {
                    heap.push(Head(p, kk, a.bits()));
                }
            }
            while set.inspected < limit {
                let Some(Head(p, kk, a)) = heap.pop() else { break };
                set.inspected += index.table(kk).buckets().bucket_size(a);
                set.tables[kk]
                    .buckets
                    .push((HashAddress::new_unchecked(a, index.t()), p));
                if let Some((a, p)) = iters[kk].next() {
                    heap.push(Head(p, kk, a.bits()));
                }
            }
            let all = 1usize << index.t();
            for tp in &mut set.tables {
                tp.complete = tp.buckets.len() == all;
            }
        }
    }
    Ok(set)
}

/// `sum_k p^k_m(x)` for an element at angle `theta`, with per-table bit
/// profiles at the true angle.
fn multiprobe_mass(ctx: &QueryContext, probes: &ProbeSet, theta: f64) -> Result<f64> {
    let mut total = 0.0;
    for (kk, tp) in probes.tables.iter().enumerate() {
        if tp.complete {
            total += 1.0;
            continue;
        }
        if tp.buckets.is_empty() {
            continue;
        }
        let profile = BitFlipProfile::new(theta, ctx.projections(kk))?;
        let q = ctx.address(kk).bits();
        total += tp
            .buckets
            .iter()
            .map(|(b, _)| profile.flip_set_prob(b.bits() ^ q))
            .sum::<f64>();
    }
    Ok(total)
}

/// Multi-Probe Count: every occurrence in a probed bucket with angle in `A`
/// scores `1 / sum_k p^k_m(x)`. Duplicates across tables all score.
pub fn multi_probe_count(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
    probes: &ProbeSet,
) -> Result<EstimateReport> {
    check_query(index, data, ctx)?;
    check_probes(index, probes)?;
    let mut memo: BTreeMap<u32, f64> = BTreeMap::new();
    let mut sum = 0.0;
    let mut inspected = 0u64;
    for (kk, tp) in probes.tables.iter().enumerate() {
        let table = index.table(kk).buckets();
        for (b, _) in &tp.buckets {
            for &id in table.bucket(b.bits()) {
                inspected += 1;
                let theta = data.angle_to(ctx.vector(), id as usize);
                if !range.contains(theta) {
                    continue;
                }
                let inv = match memo.get(&id) {
                    Some(&v) => v,
                    None => {
                        let mass = multiprobe_mass(ctx, probes, theta)?;
                        if mass <= 0.0 {
                            return Err(Error::invariant("probed element has zero probe mass"));
                        }
                        memo.insert(id, 1.0 / mass);
                        1.0 / mass
                    }
                };
                sum += inv;
            }
        }
    }
    Ok(EstimateReport::single(sum, 0, inspected, inspected == 0))
}

/// Distinct elements with angle in `A` among the probed buckets.
pub fn multiprobe_baseline(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    range: AngleRange,
    probes: &ProbeSet,
) -> Result<EstimateReport> {
    check_query(index, data, ctx)?;
    check_probes(index, probes)?;
    let mut seen = BTreeSet::new();
    let mut inspected = 0u64;
    for (kk, tp) in probes.tables.iter().enumerate() {
        let table = index.table(kk).buckets();
        for (b, _) in &tp.buckets {
            for &id in table.bucket(b.bits()) {
                inspected += 1;
                if range.contains(data.angle_to(ctx.vector(), id as usize)) {
                    seen.insert(id);
                }
            }
        }
    }
    Ok(EstimateReport::single(seen.len() as f64, 0, inspected, inspected == 0))
}

fn check_probes(index: &LshIndex, probes: &ProbeSet) -> Result<()> {
    if probes.tables.len() != index.k() {
        return Err(Error::config("probe set was planned for a different index"));
    }
    Ok(())
}

/// Splits `total` into `groups` near-equal parts, remainder to the first.
pub fn split_budget(total: u64, groups: u32) -> Vec<u64> {
    let g = groups as u64;
    (0..g).map(|i| total / g + u64::from(i < total % g)).collect()
}

/// Median of `groups` independent runs. `run(i)` must use fresh randomness
/// for each `i`.
pub fn median_of_means<F>(groups: u32, mut run: F) -> Result<EstimateReport>
where
    F: FnMut(u32) -> Result<EstimateReport>,
{
    if groups == 0 || groups.is_multiple_of(2) {
        return Err(Error::config("median-of-means group count must be odd"));
    }
    let mut out = EstimateReport::default();
    let mut estimates = Vec::with_capacity(groups as usize);
    for g in 0..groups {
        let r = run(g)?;
        out.samples_used += r.samples_used;
        out.elements_inspected += r.elements_inspected;
        out.empty_support |= r.empty_support;
        if let (Some(a), Some(b)) = (out.elapsed, r.elapsed) {
            out.elapsed = Some(a + b);
        } else if g == 0 {
            out.elapsed = r.elapsed;
        }
        estimates.push(r.estimate);
    }
    out.estimate = median(&estimates);
    out.group_estimates = estimates;
    Ok(out)
}

/// Median of an odd-length slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Sample-count advice: concrete when both unknowns are supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleAdvice {
    Samples(u64),
    /// `S = (1 + 1/eps^2) E[C_q(I)] / (|A_q| p_min)` needs these inputs.
    Symbolic {
        needs_expected_pool: bool,
        needs_count_guess: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerAdvice {
    pub tables: u64,
    pub samples: SampleAdvice,
    pub groups: u32,
    pub p_min: f64,
}

/// Tables `K = ceil(8 / (eps^2 p_min))`, groups `M` = smallest odd integer
/// `>= 11 ln(1/delta)`, and samples as in [`SampleAdvice`]. `p_min` is the
/// grid minimum of `P(d in I | theta)` over `A`.
pub fn plan_resources(
    t: u32,
    range: AngleRange,
    set: &HammingSet,
    epsilon: f64,
    delta: f64,
    expected_pool: Option<f64>,
    count_guess: Option<f64>,
) -> Result<PlannerAdvice> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::config("epsilon must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config("delta must lie in (0, 1)"));
    }
    let p_min = min_collision_prob(t, range, set, DEFAULT_GRID)?;
    if p_min <= 0.0 {
        return Err(Error::config("hamming set has zero probability somewhere in the range"));
    }
    let tables = ceil_tol(8.0 / (epsilon * epsilon * p_min));
    let groups = {
        let m = ceil_tol(11.0 * libm::log(1.0 / delta)).max(1);
        (if m.is_multiple_of(2) { m + 1 } else { m }) as u32
    };
    let samples = match (expected_pool, count_guess) {
        (Some(pool), Some(count)) if pool >= 0.0 && count > 0.0 => {
            let s = (1.0 + 1.0 / (epsilon * epsilon)) * pool / (count * p_min);
            SampleAdvice::Samples(ceil_tol(s).max(1))
        }
        (Some(_), Some(_)) => return Err(Error::config("pool must be >= 0 and count guess > 0")),
        (pool, count) => SampleAdvice::Symbolic {
            needs_expected_pool: pool.is_none(),
            needs_count_guess: count.is_none(),
        },
    };
    Ok(PlannerAdvice {
        tables,
        samples,
        groups,
        p_min,
    })
}

/// Ceiling that ignores rounding noise just above an integer.
fn ceil_tol(x: f64) -> u64 {
    libm::ceil(x - 1e-9) as u64
}

/// Which estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    LshCount,
    MultiProbeCount,
    Spring,
    MultiProbe,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::LshCount => "lsh-count",
            EstimatorKind::MultiProbeCount => "mpc",
            EstimatorKind::Spring => "spring",
            EstimatorKind::MultiProbe => "multiprobe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            EstimatorKind::LshCount,
            EstimatorKind::MultiProbeCount,
            EstimatorKind::Spring,
            EstimatorKind::MultiProbe,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// Everything one estimator run needs besides the index and query.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub range: AngleRange,
    /// Required by LSH Count, rejected by the probing estimators.
    pub hamming: Option<HammingSet>,
    /// Sample budget for LSH Count; inspection budget for the probing
    /// estimators when `probes` is `None`.
    pub samples: u64,
    pub theta_rep: f64,
    /// Per-table probe count; overrides the global budget.
    pub probes: Option<u64>,
    pub groups: u32,
}

impl EstimatorConfig {
    pub fn validate(&self, t: u32) -> Result<()> {
        if self.groups == 0 || self.groups.is_multiple_of(2) {
            return Err(Error::config("group count must be odd"));
        }
        if !(self.theta_rep > 0.0 && self.theta_rep < PI) {
            return Err(Error::InvalidAngle(self.theta_rep));
        }
        match self.kind {
            EstimatorKind::LshCount => {
                let set = self
                    .hamming
                    .as_ref()
                    .ok_or_else(|| Error::config("lsh-count needs a hamming set"))?;
                set.check(t)?;
                if self.samples == 0 {
                    return Err(Error::config("sample budget must be at least 1"));
                }
            }
            EstimatorKind::MultiProbeCount | EstimatorKind::MultiProbe => {
                if self.hamming.is_some() {
                    return Err(Error::config("a hamming set only applies to lsh-count"));
                }
                if self.probes == Some(0) {
                    return Err(Error::config("probe count must be at least 1"));
                }
            }
            EstimatorKind::Spring => {
                if self.hamming.is_some() {
                    return Err(Error::config("a hamming set only applies to lsh-count"));
                }
            }
        }
        Ok(())
    }

    fn probe_budget(&self, budget: u64) -> ProbeBudget {
        match self.probes {
            Some(b) => ProbeBudget::PerTable(b),
            None => ProbeBudget::Global(budget),
        }
    }
}

/// One ungrouped run of `config.kind` with `budget` samples or inspections.
pub fn run_estimator<R: Rng + ?Sized>(
    index: &LshIndex,
    data: &Dataset,
    ctx: &QueryContext,
    config: &EstimatorConfig,
    budget: u64,
    rng: &mut R,
) -> Result<EstimateReport> {
    config.validate(index.t())?;
    match config.kind {
        EstimatorKind::LshCount => {
            let set = config.hamming.as_ref().expect("validated");
            lsh_count(index, data, ctx, config.range, set, budget.max(1), rng)
        }
        EstimatorKind::Spring => spring_baseline(index, data, ctx, config.range),
        EstimatorKind::MultiProbeCount => {
            let probes = plan_probes(index, ctx, config.theta_rep, config.probe_budget(budget))?;
            multi_probe_count(index, data, ctx, config.range, &probes)
        }
        EstimatorKind::MultiProbe => {
            let probes = plan_probes(index, ctx, config.theta_rep, config.probe_budget(budget))?;
            multiprobe_baseline(index, data, ctx, config.range, &probes)
        }
    }
}

/// Probability that the hamming distance is exactly zero.
pub fn spring_collision(t: u32, theta: f64) -> Result<f64> {
    hamming_pmf(t, theta, 0)
}
