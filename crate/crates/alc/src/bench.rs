//! JSON experiment configs for `alc bench`.

use std::fs;
use std::path::{Path, PathBuf};

use alc_core::estimators::DEFAULT_THETA_REP;
use alc_core::{AngleRange, CountsMode, Dataset, EstimatorKind, HammingSet};
use serde::Deserialize;

use crate::embeddings::load_embeddings;
use crate::error::{AlcError, Result};
use crate::fixture::{Fixture, FixtureSpec};
use crate::runner::{Query, Sweep};

/// A scalar or a list; scalars become one-point axes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Axis<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Axis::One(v) => vec![v.clone()],
            Axis::Many(v) => v.clone(),
        }
    }
}

/// Synthetic data instead of an embedding file: the standard fixture with
/// optional overrides.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n: Option<usize>,
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: Option<PathBuf>,
    pub dim: Option<usize>,
    pub max_rows: Option<usize>,
    pub synthetic: Option<SyntheticConfig>,
    pub bits: Axis<u32>,
    pub tables: Axis<u32>,
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub queries: Vec<String>,
    pub query_file: Option<PathBuf>,
    #[serde(default)]
    pub angle_min: f64,
    pub angle_max: f64,
    #[serde(default)]
    pub hamming: Vec<String>,
    pub estimators: Vec<String>,
    pub samples: Axis<u64>,
    pub probes: Option<u64>,
    #[serde(default = "default_theta_rep")]
    pub theta_rep: f64,
    #[serde(default = "one")]
    pub trials: u32,
    #[serde(default = "one")]
    pub groups: u32,
    /// Reuse this index file instead of rebuilding per trial.
    pub index: Option<PathBuf>,
    #[serde(default = "yes")]
    pub timing: bool,
    pub output: Option<PathBuf>,
}

fn default_mode() -> String {
    "auto".into()
}

fn default_theta_rep() -> f64 {
    DEFAULT_THETA_REP.to_degrees()
}

fn one() -> u32 {
    1
}

fn yes() -> bool {
    true
}

pub fn parse_mode(s: &str) -> Result<CountsMode> {
    match s {
        "auto" => Ok(CountsMode::Auto),
        "dense" => Ok(CountsMode::Dense),
        "sparse" => Ok(CountsMode::Sparse),
        _ => Err(AlcError::usage(format!("unknown counts mode {s:?}"))),
    }
}

pub fn parse_estimator(s: &str) -> Result<EstimatorKind> {
    EstimatorKind::parse(s).ok_or_else(|| AlcError::usage(format!("unknown estimator {s:?}")))
}

pub fn parse_hamming(s: &str) -> Result<HammingSet> {
    HammingSet::parse(s).map_err(|e| AlcError::usage(e.to_string()))
}

pub fn degrees(lo: f64, hi: f64) -> Result<AngleRange> {
    AngleRange::from_degrees(lo, hi).map_err(|e| AlcError::usage(e.to_string()))
}

/// Queries by dataset label, plus every record of a query file.
pub fn resolve_queries(data: &Dataset, labels: &[String], query_file: Option<&Path>) -> Result<Vec<Query>> {
    let mut out = Vec::new();
    for l in labels {
        let id = data
            .find_label(l)
            .ok_or_else(|| AlcError::usage(format!("unknown query label {l:?}")))?;
        out.push(Query {
            name: l.clone(),
            vector: data.vector(id).clone(),
        });
    }
    if let Some(path) = query_file {
        let qs = load_embeddings(path, data.dim(), None)?;
        for (i, v) in qs.vectors().iter().enumerate() {
            out.push(Query {
                name: qs.label(i).unwrap_or_default().to_owned(),
                vector: v.clone(),
            });
        }
    }
    if out.is_empty() {
        return Err(AlcError::usage("no queries given"));
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AlcError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| AlcError::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Dataset and queries. Synthetic fixtures name their queries
    /// `sparse`, `medium` and `dense`; an empty query list selects all.
    pub fn dataset(&self) -> Result<(Dataset, Vec<Query>)> {
        match (&self.input, &self.synthetic) {
            (Some(path), None) => {
                let d = self.dim.ok_or_else(|| AlcError::usage("input needs dim"))?;
                let data = load_embeddings(path, d, self.max_rows)?;
                let qs = resolve_queries(&data, &self.queries, self.query_file.as_deref())?;
                Ok((data, qs))
            }
            (None, Some(s)) => {
                let mut spec = FixtureSpec::standard(s.seed);
                if let Some(n) = s.n {
                    spec.n = n;
                }
                if let Some(d) = s.dim {
                    spec.dim = d;
                }
                let f = Fixture::generate(spec)?;
                let mut qs = Vec::new();
                for (name, v) in &f.queries {
                    if self.queries.is_empty() || self.queries.contains(name) {
                        qs.push(Query {
                            name: name.clone(),
                            vector: v.clone(),
                        });
                    }
                }
                if let Some(path) = &self.query_file {
                    qs.extend(resolve_queries(&f.data, &[], Some(path))?);
                }
                if qs.is_empty() {
                    return Err(AlcError::usage("no matching fixture queries"));
                }
                Ok((f.data, qs))
            }
            _ => Err(AlcError::usage("give exactly one of input or synthetic")),
        }
    }

    pub fn sweep(&self) -> Result<Sweep> {
        let estimators = self
            .estimators
            .iter()
            .map(|s| parse_estimator(s))
            .collect::<Result<Vec<_>>>()?;
        let hamming = self
            .hamming
            .iter()
            .map(|s| parse_hamming(s))
            .collect::<Result<Vec<_>>>()?;
        let sweep = Sweep {
            bits: self.bits.values(),
            tables: self.tables.values(),
            seed: self.seed,
            mode: parse_mode(&self.mode)?,
            range: degrees(self.angle_min, self.angle_max)?,
            points: Sweep::points(&estimators, &hamming, &self.samples.values())?,
            probes: self.probes,
            theta_rep: self.theta_rep.to_radians(),
            trials: self.trials,
            groups: self.groups,
            timing: self.timing,
        };
        sweep.validate()?;
        Ok(sweep)
    }
}
