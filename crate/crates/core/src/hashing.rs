//! Random-hyperplane (sign) hashing.
//!
//! Bit order: plane `j` of a [`HyperplaneSet`] sets bit `j` of the address,
//! so plane 0 is the least significant bit. "The first `a` bits" of an
//! address always means bits `0..a`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, dot, UnitVector};
use crate::rng::{self, Domain};

/// Largest supported bit count. Dense structures are sized `2^t`.
pub const MAX_BITS: u32 = 30;

pub(crate) fn check_bits(t: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidBitCount(t))
    }
}

/// Mask selecting the low `a` bits.
#[inline]
pub(crate) fn low_mask(a: u32) -> u32 {
    if a >= 32 {
        u32::MAX
    } else {
        (1u32 << a) - 1
    }
}

/// A `t`-bit bucket address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HashAddress {
    bits: u32,
    t: u32,
}

impl HashAddress {
    pub fn new(bits: u32, t: u32) -> Result<Self> {
        check_bits(t)?;
        if bits & !low_mask(t) != 0 {
            return Err(Error::AddressOutOfRange { bits, t });
        }
        Ok(HashAddress { bits, t })
    }

    #[inline]
    pub(crate) fn new_unchecked(bits: u32, t: u32) -> Self {
        debug_assert!(bits & !low_mask(t) == 0);
        HashAddress { bits, t }
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn t(&self) -> u32 {
        self.t
    }

    #[inline]
    pub fn bit(&self, j: u32) -> bool {
        self.bits >> j & 1 == 1
    }

    pub(crate) fn check_same_t(&self, other: &HashAddress) -> Result<()> {
        if self.t == other.t {
            Ok(())
        } else {
            Err(Error::BitCountMismatch(self.t, other.t))
        }
    }
}

impl core::fmt::Display for HashAddress {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        // Plane order: bit 0 first.
        for j in 0..self.t {
            f.write_str(if self.bit(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Popcount of the XOR of two addresses.
pub fn hamming_distance(a: HashAddress, b: HashAddress) -> Result<u32> {
    a.check_same_t(&b)?;
    Ok((a.bits ^ b.bits).count_ones())
}

/// `0` if `plane . v <= 0`, else `1`.
#[inline]
pub fn hash_bit(plane: &[f64], v: &[f64]) -> bool {
    dot(plane, v) > 0.0
}

/// `t` Gaussian hyperplanes in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneSet {
    t: u32,
    dim: usize,
    seed: u64,
    planes: Vec<f64>,
}

impl HyperplaneSet {
    /// Draws `t` planes with i.i.d. standard normal coordinates from the
    /// `(seed, Hyperplanes, stream)` generator.
    pub fn generate(t: u32, dim: usize, seed: u64, stream: u64) -> Result<Self> {
        check_bits(t)?;
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let mut rng = rng::stream(seed, Domain::Hyperplanes, stream);
        let planes = (0..t as usize * dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(HyperplaneSet { t, dim, seed, planes })
    }

    /// Builds a set from explicit row-major coordinates.
    pub fn from_planes(t: u32, dim: usize, seed: u64, planes: Vec<f64>) -> Result<Self> {
        check_bits(t)?;
        check_dim(t as usize * dim, planes.len())?;
        Ok(HyperplaneSet { t, dim, seed, planes })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn plane(&self, j: usize) -> &[f64] {
        &self.planes[j * self.dim..(j + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.planes
    }

    pub fn hash_address(&self, v: &UnitVector) -> Result<HashAddress> {
        check_dim(self.dim, v.dim())?;
        Ok(self.hash_slice(v.as_slice()))
    }

    pub(crate) fn hash_slice(&self, v: &[f64]) -> HashAddress {
        let bits = self
            .planes
            .chunks_exact(self.dim)
            .enumerate()
            .fold(0u32, |acc, (j, plane)| acc | (hash_bit(plane, v) as u32) << j);
        HashAddress::new_unchecked(bits, self.t)
    }

    pub fn project_query(&self, q: &UnitVector) -> Result<QueryProjections> {
        check_dim(self.dim, q.dim())?;
        Ok(QueryProjections(
            self.planes
                .chunks_exact(self.dim)
                .map(|plane| dot(plane, q.as_slice()))
                .collect(),
        ))
    }
}

/// Free-function form of [`HyperplaneSet::hash_address`].
pub fn hash_address(planes: &HyperplaneSet, v: &UnitVector) -> Result<HashAddress> {
    planes.hash_address(v)
}

/// Free-function form of [`HyperplaneSet::project_query`].
pub fn project_query(planes: &HyperplaneSet, q: &UnitVector) -> Result<QueryProjections> {
    planes.project_query(q)
}

/// The query's raw inner products with each plane of one table.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryProjections(Vec<f64>);

impl QueryProjections {
    pub fn new(values: Vec<f64>) -> Self {
        QueryProjections(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Address implied by the projection signs.
    pub fn address(&self) -> HashAddress {
        let bits = self
            .0
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, &v)| acc | ((v > 0.0) as u32) << j);
        HashAddress::new_unchecked(bits, self.0.len() as u32)
    }
}
