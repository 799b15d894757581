//! Unit-sphere vectors, angles and datasets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// A vector of unit L2 norm with at least two coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Scales `raw` to unit length.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::DimensionTooSmall(raw.len()));
        }
        if raw.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = libm::sqrt(raw.iter().map(|c| c * c).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(UnitVector(raw.iter().map(|c| c / norm).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &UnitVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Free-function form of [`UnitVector::normalize`].
pub fn normalize(raw: &[f64]) -> Result<UnitVector> {
    UnitVector::normalize(raw)
}

/// Angle in radians between two unit vectors, in `[0, pi]`.
///
/// The dot product is clamped to `[-1, 1]` before `acos`.
pub fn angle_between(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    Ok(angle_from_dot(a.dot(b)?))
}

#[inline]
pub(crate) fn angle_from_dot(dot: f64) -> f64 {
    libm::acos(dot.clamp(-1.0, 1.0))
}

/// A closed range of angles `[lo, hi]` with `0 <= lo < hi <= pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    lo: f64,
    hi: f64,
}

impl AngleRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > PI || lo >= hi {
            return Err(Error::InvalidAngleRange { lo, hi });
        }
        Ok(AngleRange { lo, hi })
    }

    pub fn from_degrees(lo: f64, hi: f64) -> Result<Self> {
        // 180 degrees must land on pi exactly.
        let to_rad = |deg: f64| if deg == 180.0 { PI } else { deg.to_radians() };
        Self::new(to_rad(lo), to_rad(hi))
    }

    pub fn full() -> Self {
        AngleRange { lo: 0.0, hi: PI }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// `n` unit vectors of a common dimension with optional unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    vectors: Vec<UnitVector>,
    labels: Option<Vec<String>>,
    by_label: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn new(vectors: Vec<UnitVector>, labels: Option<Vec<String>>) -> Result<Self> {
        let dim = vectors.first().map(UnitVector::dim).ok_or(Error::EmptyDataset)?;
        for v in &vectors {
            check_dim(dim, v.dim())?;
        }
        let mut by_label = BTreeMap::new();
        if let Some(labels) = &labels {
            if labels.len() != vectors.len() {
                return Err(Error::LabelCountMismatch {
                    labels: labels.len(),
                    vectors: vectors.len(),
                });
            }
            for (i, label) in labels.iter().enumerate() {
                if by_label.insert(label.clone(), i).is_some() {
                    return Err(Error::DuplicateLabel(label.clone()));
                }
            }
        }
        Ok(Dataset {
            dim,
            vectors,
            labels,
            by_label,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[UnitVector] {
        &self.vectors
    }

    pub fn vector(&self, id: usize) -> &UnitVector {
        &self.vectors[id]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[id].as_str())
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    /// Angle between `q` and element `id`.
    #[inline]
    pub fn angle_to(&self, q: &UnitVector, id: usize) -> f64 {
        angle_from_dot(dot(q.as_slice(), self.vectors[id].as_slice()))
    }

    /// Ids of all elements whose angle to `q` lies in `range` (closed).
    pub fn members_in_range(&self, q: &UnitVector, range: AngleRange) -> Result<Vec<usize>> {
        check_dim(self.dim, q.dim())?;
        Ok((0..self.len())
            .filter(|&id| range.contains(self.angle_to(q, id)))
            .collect())
    }
}

/// Exact `|A_q|` by a linear scan.
pub fn brute_force_count(data: &Dataset, q: &UnitVector, range: AngleRange) -> Result<usize> {
    Ok(data.members_in_range(q, range)?.len())
}

/// Histogram of angles to `q` in bins of `bin_degrees` over `[0, 180]`.
/// The last bin is closed on the right.
pub fn angle_histogram(data: &Dataset, q: &UnitVector, bin_degrees: f64) -> Result<Vec<usize>> {
    check_dim(data.dim(), q.dim())?;
    if !(bin_degrees > 0.0 && bin_degrees <= 180.0) {
        return Err(Error::config("histogram bin width must be in (0, 180]"));
    }
    let bins = libm::ceil(180.0 / bin_degrees) as usize;
    let mut hist = alloc::vec![0usize; bins];
    for id in 0..data.len() {
        let deg = data.angle_to(q, id).to_degrees();
        let bin = ((deg / bin_degrees) as usize).min(bins - 1);
        hist[bin] += 1;
    }
    Ok(hist)
}
