//! Seeded synthetic datasets with planted neighborhoods.
//!
//! Background points are uniform on the sphere. Each query gets a cluster of
//! points at angles uniform in `[inner_min, range_max]`, so they fall inside
//! the query range, plus a halo just outside it at angles uniform in
//! `(range_max, halo_max]`.

use alc_core::rng::{derive_seed, stream, Domain};
use alc_core::{AngleRange, Dataset, UnitVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    /// `(name, planted count inside the range)` per query.
    pub queries: Vec<(String, usize)>,
    /// Halo size as a multiple of the planted count.
    pub halo_factor: f64,
    pub inner_min_deg: f64,
    pub range_max_deg: f64,
    pub halo_max_deg: f64,
}

impl FixtureSpec {
    /// 10,000 points on the 24-sphere with sparse, medium and dense queries
    /// of about 10, 100 and 400 neighbors within 45 degrees.
    pub fn standard(seed: u64) -> Self {
        FixtureSpec {
            n: 10_000,
            dim: 25,
            seed,
            queries: vec![("sparse".into(), 10), ("medium".into(), 100), ("dense".into(), 400)],
            halo_factor: 2.0,
            inner_min_deg: 15.0,
            range_max_deg: 45.0,
            halo_max_deg: 70.0,
        }
    }

    pub fn range(&self) -> AngleRange {
        AngleRange::from_degrees(0.0, self.range_max_deg).expect("valid fixture range")
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub data: Dataset,
    pub queries: Vec<(String, UnitVector)>,
}

fn gaussian<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> UnitVector {
    loop {
        if let Ok(v) = UnitVector::normalize(&gaussian(rng, dim)) {
            return v;
        }
    }
}

/// A unit vector at angle `theta` from `q` in a random direction.
pub fn at_angle<R: Rng>(rng: &mut R, q: &UnitVector, theta: f64) -> UnitVector {
    let q = q.as_slice();
    loop {
        let mut g = gaussian(rng, q.len());
        let proj: f64 = g.iter().zip(q).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
        let Ok(u) = UnitVector::normalize(&g) else { continue };
        let (s, c) = theta.sin_cos();
        let x: Vec<f64> = q.iter().zip(u.as_slice()).map(|(a, b)| c * a + s * b).collect();
        if let Ok(v) = UnitVector::normalize(&x) {
            return v;
        }
    }
}

impl Fixture {
    pub fn generate(spec: FixtureSpec) -> Result<Self> {
        let mut rng = stream(derive_seed(spec.seed, 0, 0), Domain::Fixture, 0);
        let mut vectors = Vec::with_capacity(spec.n);
        let mut labels = Vec::with_capacity(spec.n);
        let mut queries = Vec::new();
        let deg = std::f64::consts::PI / 180.0;
        for (name, planted) in &spec.queries {
            let q = random_unit(&mut rng, spec.dim);
            let halo = (*planted as f64 * spec.halo_factor).round() as usize;
            for i in 0..planted + halo {
                let (lo, hi) = if i < *planted {
                    (spec.inner_min_deg, spec.range_max_deg)
                } else {
                    (spec.range_max_deg, spec.halo_max_deg)
                };
                let theta = rng.random_range(lo..hi) * deg;
                vectors.push(at_angle(&mut rng, &q, theta));
                labels.push(format!("{name}_{i}"));
            }
            queries.push((name.clone(), q));
        }
        let planted_total = vectors.len();
        for i in 0..spec.n.saturating_sub(planted_total) {
            vectors.push(random_unit(&mut rng, spec.dim));
            labels.push(format!("bg_{i}"));
        }
        let data = Dataset::new(vectors, Some(labels))?;
        Ok(Fixture { spec, data, queries })
    }

    pub fn query(&self, name: &str) -> Option<&UnitVector> {
        self.queries.iter().find(|(n, _)| n == name).map(|(_, q)| q)
    }

    /// Exact `|A_q|` per query for the fixture range.
    pub fn truth_counts(&self) -> Vec<usize> {
        self.queries
            .iter()
            .map(|(_, q)| self.data.members_in_range(q, self.spec.range()).unwrap().len())
            .collect()
    }
}
