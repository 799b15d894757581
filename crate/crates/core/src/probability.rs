//! Closed-form collision probabilities for random-hyperplane hashing.
//!
//! * hamming distance between the `t`-bit addresses of two points at angle
//!   `theta` is `Binomial(t, theta / pi)`;
//! * conditioned on the query's projection `r_q` onto a plane, a point at
//!   angle `theta` lands on the other side with probability
//!   `1/2 - 1/2 erf(|r_q| / (sqrt(2) tan theta))`;
//! * for a triple `(q, x, y)` one plane separates `q` from `x` and/or `y`
//!   with probabilities that are linear in the three pairwise angles, which
//!   makes the joint hamming distribution a multinomial sum.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::AngleRange;
use crate::hashing::{HashAddress, QueryProjections};

/// Outputs in `[-NEG_TOLERANCE, 0)` are treated as rounding noise and clamped.
pub const NEG_TOLERANCE: f64 = 1e-12;

/// Grid size used by the resource planner when searching for `min p(x)`.
pub const DEFAULT_GRID: usize = 256;

/// A non-empty sorted set of hamming distances.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HammingSet(Vec<u32>);

impl HammingSet {
    pub fn new(mut distances: Vec<u32>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::InvalidHammingSet("empty".into()));
        }
        distances.sort_unstable();
        let before = distances.len();
        distances.dedup();
        if distances.len() != before {
            return Err(Error::InvalidHammingSet("duplicate distance".into()));
        }
        Ok(HammingSet(distances))
    }

    /// `{lo, lo + 1, ..., hi}`.
    pub fn range(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidHammingSet(alloc::format!("{lo}..{hi}")));
        }
        Ok(HammingSet((lo..=hi).collect()))
    }

    /// Hamming threshold `h`, i.e. `{0, ..., h}`.
    pub fn threshold(h: u32) -> Self {
        HammingSet((0..=h).collect())
    }

    pub fn full(t: u32) -> Self {
        Self::threshold(t)
    }

    /// Parses `"a..b"` (inclusive) or a comma list such as `"0,2,3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidHammingSet(s.to_string());
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().parse().map_err(|_| bad())?;
            return Self::range(lo, hi);
        }
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn distances(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> core::iter::Copied<core::slice::Iter<'_, u32>> {
        self.0.iter().copied()
    }

    pub fn contains(&self, d: u32) -> bool {
        self.0.binary_search(&d).is_ok()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().expect("non-empty")
    }

    /// True when the set is `{0, ..., t}`.
    pub fn is_full(&self, t: u32) -> bool {
        self.0.len() == t as usize + 1 && self.max() == t
    }

    pub fn check(&self, t: u32) -> Result<()> {
        if self.max() > t {
            Err(Error::DistanceOutOfRange {
                distance: self.max(),
                t,
            })
        } else {
            Ok(())
        }
    }
}

impl core::fmt::Display for HammingSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let v = &self.0;
        let contiguous = v.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous && v.len() > 1 {
            write!(f, "{}..{}", v[0], v[v.len() - 1])
        } else {
            let parts: Vec<String> = v.iter().map(|d| d.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidAngle(theta))
    }
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_choose(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    let lg = |x: u32| libm::lgamma(x as f64 + 1.0);
    lg(n) - lg(k) - lg(n - k)
}

/// Exact `C(n, k)` as a float; exact for `n <= 30`.
pub(crate) fn choose(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut c = 1u64;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c as f64
}

/// `P(d_qx = i | theta) = C(t, i) (1 - theta/pi)^(t - i) (theta/pi)^i`.
pub fn hamming_pmf(t: u32, theta: f64, i: u32) -> Result<f64> {
    check_theta(theta)?;
    if i > t {
        return Err(Error::DistanceOutOfRange { distance: i, t });
    }
    Ok(pmf_unchecked(t, theta / PI, i))
}

fn pmf_unchecked(t: u32, p: f64, i: u32) -> f64 {
    if p == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if i == t { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(t, i) + (t - i) as f64 * libm::log1p(-p) + i as f64 * libm::log(p);
    libm::exp(ln).min(1.0)
}

/// `p(x) = P(d_qx in I | theta)`.
pub fn hamming_cdf_over_set(t: u32, theta: f64, set: &HammingSet) -> Result<f64> {
    check_theta(theta)?;
    set.check(t)?;
    if set.is_full(t) {
        return Ok(1.0);
    }
    let p = theta / PI;
    Ok(set.iter().map(|i| pmf_unchecked(t, p, i)).sum::<f64>().min(1.0))
}

/// Minimum of [`hamming_cdf_over_set`] over `grid` evenly spaced angles
/// spanning `range` inclusive.
pub fn min_collision_prob(t: u32, range: AngleRange, set: &HammingSet, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::config("grid must have at least 2 points"));
    }
    let step = (range.hi() - range.lo()) / (grid - 1) as f64;
    let mut min = f64::INFINITY;
    for g in 0..grid {
        let theta = if g == grid - 1 {
            range.hi()
        } else {
            range.lo() + step * g as f64
        };
        min = min.min(hamming_cdf_over_set(t, theta, set)?);
    }
    Ok(min)
}

/// Probability that a point at angle `theta` from `q` falls on the other side
/// of a plane whose projection onto `q` is `r_q`.
pub fn bit_flip_prob(theta: f64, r_q: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(flip_unchecked(theta, r_q))
}

#[inline]
fn flip_unchecked(theta: f64, r_q: f64) -> f64 {
    if r_q == 0.0 || theta == FRAC_PI_2 {
        return 0.5;
    }
    if theta == 0.0 {
        return 0.0;
    }
    if theta == PI {
        return 1.0;
    }
    let arg = r_q.abs() / (SQRT_2 * libm::tan(theta));
    // Equal to 1/2 - erf(arg)/2; erfc keeps precision where erf rounds to 1.
    (0.5 * libm::erfc(arg)).clamp(0.0, 1.0)
}

/// Per-plane flip probabilities for one table at a fixed angle.
#[derive(Debug, Clone, PartialEq)]
pub struct BitFlipProfile(Vec<f64>);

impl BitFlipProfile {
    pub fn new(theta: f64, projections: &QueryProjections) -> Result<Self> {
        check_theta(theta)?;
        Ok(BitFlipProfile(
            projections.values().iter().map(|&r| flip_unchecked(theta, r)).collect(),
        ))
    }

    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config("flip probabilities must lie in [0, 1]"));
        }
        Ok(BitFlipProfile(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn t(&self) -> u32 {
        self.0.len() as u32
    }

    /// Probability of landing exactly on the bucket obtained by flipping
    /// `flips` relative to the query address.
    #[inline]
    pub fn flip_set_prob(&self, flips: u32) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(j, &p)| if flips >> j & 1 == 1 { p } else { 1.0 - p })
            .product()
    }
}

/// `prod_{flipped} p_j * prod_{unflipped} (1 - p_j)`, flips taken relative to
/// the query address.
pub fn bucket_collision_prob(profile: &BitFlipProfile, query: HashAddress, bucket: HashAddress) -> Result<f64> {
    query.check_same_t(&bucket)?;
    if profile.t() != query.t() {
        return Err(Error::BitCountMismatch(profile.t(), query.t()));
    }
    Ok(profile.flip_set_prob(query.bits() ^ bucket.bits()))
}

/// The three pairwise angles of a `(q, x, y)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTriple {
    pub qx: f64,
    pub qy: f64,
    pub xy: f64,
}

/// Outcome probabilities of a single random plane on a `(q, x, y)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutProbabilities {
    /// Plane separates `q` from both `x` and `y`.
    pub both: f64,
    /// Separates `q` from `y` only.
    pub only_y: f64,
    /// Separates `q` from `x` only.
    pub only_x: f64,
    pub neither: f64,
}

fn clamp_prob(p: f64) -> Result<f64> {
    if p < -NEG_TOLERANCE {
        Err(Error::NonRealizableAngles)
    } else {
        Ok(p.clamp(0.0, 1.0))
    }
}

pub fn joint_pairwise_cut_probs(angles: AngleTriple) -> Result<CutProbabilities> {
    let AngleTriple { qx, qy, xy } = angles;
    for a in [qx, qy, xy] {
        check_theta(a)?;
    }
    let tau = 2.0 * PI;
    Ok(CutProbabilities {
        both: clamp_prob((qx + qy - xy) / tau)?,
        only_y: clamp_prob((-qx + qy + xy) / tau)?,
        only_x: clamp_prob((qx - qy + xy) / tau)?,
        neither: clamp_prob(1.0 - (qx + qy + xy) / tau)?,
    })
}

/// `P(d_qx = a, d_qy = b)` over `t` independent planes.
pub fn joint_hamming_pmf(t: u32, a: u32, b: u32, angles: AngleTriple) -> Result<f64> {
    for d in [a, b] {
        if d > t {
            return Err(Error::DistanceOutOfRange { distance: d, t });
        }
    }
    let cuts = joint_pairwise_cut_probs(angles)?;
    Ok(joint_pmf_unchecked(t, a, b, &cuts))
}

fn joint_pmf_unchecked(t: u32, a: u32, b: u32, c: &CutProbabilities) -> f64 {
    // Symmetric in (x, a) <-> (y, b); normalize to a <= b.
    let (a, b, only_a, only_b) = if a <= b {
        (a, b, c.only_x, c.only_y)
    } else {
        (b, a, c.only_y, c.only_x)
    };
    let mut sum = 0.0;
    for i in 0..=a {
        // i planes cut both, b - i only the b-side, a - i only the a-side.
        if a + b - i > t {
            continue;
        }
        let rest = t - (a + b - i);
        sum += choose(t, i)
            * powi(c.both, i)
            * choose(t - i, b - i)
            * powi(only_b, b - i)
            * choose(t - b, a - i)
            * powi(only_a, a - i)
            * powi(c.neither, rest);
    }
    sum.clamp(0.0, 1.0)
}

#[inline]
fn powi(x: f64, n: u32) -> f64 {
    // 0^0 = 1
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// `p(x, y) = P(d_qx in I and d_qy in I)`.
pub fn joint_hamming_over_set(t: u32, set: &HammingSet, angles: AngleTriple) -> Result<f64> {
    set.check(t)?;
    let cuts = joint_pairwise_cut_probs(angles)?;
    let mut sum = 0.0;
    for a in set.iter() {
        for b in set.iter() {
            sum += joint_pmf_unchecked(t, a, b, &cuts);
        }
    }
    Ok(sum.min(1.0))
}
