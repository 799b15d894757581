//! Trial runner and CSV rows.
//!
//! Each trial builds `M` fresh index realizations (one per median-of-means
//! group) from seeds derived from `(seed, trial, group)` and runs every
//! configured estimator on them, so estimators within a trial are paired.
//! With a reused index only the sampling streams change between trials.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use alc_core::estimators::{diagnose_bias, median_of_means, run_estimator, split_budget, EstimateReport};
use alc_core::rng::{derive_seed, stream, Domain};
use alc_core::{
    AngleRange, CountsMode, Dataset, EstimatorConfig, EstimatorKind, HammingSet, IndexParams, LshIndex, UnitVector,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build_index_parallel;
use crate::error::{AlcError, Result};

/// One CSV row. The first eleven columns are the fixed report schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub query: String,
    pub estimator: String,
    #[serde(rename = "K")]
    pub k: u32,
    pub t: u32,
    #[serde(rename = "I")]
    pub i: String,
    #[serde(rename = "S")]
    pub s: u64,
    pub trial: u32,
    pub estimate: Option<f64>,
    pub truth: Option<u64>,
    pub rel_error: Option<f64>,
    pub elapsed_ms: Option<f64>,
    pub samples_used: Option<u64>,
    pub inspected: Option<u64>,
    pub w: Option<f64>,
    pub rel_bias: Option<f64>,
    pub error: Option<String>,
}

pub fn write_rows<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| AlcError::io("<csv output>", e))?;
    Ok(())
}

pub fn rows_to_string(rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is UTF-8")
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Clone)]
pub struct Query {
    pub name: String,
    pub vector: UnitVector,
}

/// One estimator configuration within a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub kind: EstimatorKind,
    pub hamming: Option<HammingSet>,
    pub budget: u64,
}

impl Point {
    fn i_column(&self) -> String {
        match (self.kind, &self.hamming) {
            (_, Some(h)) => h.to_string(),
            (EstimatorKind::Spring, None) => "0".into(),
            _ => String::new(),
        }
    }

    /// Hamming set for the bias diagnostic, when the estimator has one.
    fn bias_set(&self) -> Option<HammingSet> {
        match self.kind {
            EstimatorKind::LshCount => self.hamming.clone(),
            EstimatorKind::Spring => Some(HammingSet::threshold(0)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub bits: Vec<u32>,
    pub tables: Vec<u32>,
    pub seed: u64,
    pub mode: CountsMode,
    pub range: AngleRange,
    pub points: Vec<Point>,
    pub probes: Option<u64>,
    pub theta_rep: f64,
    pub trials: u32,
    pub groups: u32,
    pub timing: bool,
}

impl Sweep {
    /// Cartesian product of estimators, hamming sets (LSH Count only) and
    /// budgets, in that nesting order.
    pub fn points(estimators: &[EstimatorKind], hamming: &[HammingSet], budgets: &[u64]) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for &kind in estimators {
            let sets: Vec<Option<HammingSet>> = if kind == EstimatorKind::LshCount {
                if hamming.is_empty() {
                    return Err(AlcError::usage("lsh-count needs at least one hamming set"));
                }
                hamming.iter().cloned().map(Some).collect()
            } else {
                vec![None]
            };
            for h in sets {
                for &budget in budgets {
                    out.push(Point {
                        kind,
                        hamming: h.clone(),
                        budget,
                    });
                }
            }
        }
        Ok(out)
    }

    fn config(&self, p: &Point) -> EstimatorConfig {
        EstimatorConfig {
            kind: p.kind,
            range: self.range,
            hamming: p.hamming.clone(),
            samples: p.budget,
            theta_rep: self.theta_rep,
            probes: self.probes,
            groups: self.groups,
        }
    }

    /// Rejects configurations no trial could run.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(AlcError::usage("need at least one trial"));
        }
        for &t in &self.bits {
            for &k in &self.tables {
                IndexParams::new(t, k, self.seed, self.mode)?;
            }
            for p in &self.points {
                self.config(p).validate(t)?;
            }
        }
        Ok(())
    }
}

/// Stable 48-bit stream id for a `(query, point)` pair.
fn stream_id(query: &str, p: &Point) -> u64 {
    let key = format!("{query}\u{1f}{}\u{1f}{}\u{1f}{}", p.kind.name(), p.i_column(), p.budget);
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    h & ((1 << 48) - 1)
}

fn run_point(
    indices: &[LshIndex],
    data: &Dataset,
    query: &Query,
    sweep: &Sweep,
    p: &Point,
    trial: u32,
) -> alc_core::Result<EstimateReport> {
    let cfg = sweep.config(p);
    let budgets = split_budget(p.budget, sweep.groups);
    let sid = stream_id(&query.name, p);
    median_of_means(sweep.groups, |g| {
        let index = &indices[g as usize % indices.len()];
        let ctx = index.query(&query.vector)?;
        let mut rng = stream(derive_seed(sweep.seed, trial as u64, g as u64), Domain::Sampling, sid);
        let start = Instant::now();
        let mut r = run_estimator(index, data, &ctx, &cfg, budgets[g as usize], &mut rng)?;
        r.elapsed = Some(start.elapsed());
        Ok(r)
    })
}

/// Runs the sweep. Rows come out ordered by `(t, K, query, point, trial)`.
/// `reuse` replaces per-trial rebuilding with one fixed index.
pub fn run_sweep(data: &Dataset, queries: &[Query], sweep: &Sweep, reuse: Option<&LshIndex>) -> Result<Vec<Row>> {
    sweep.validate()?;
    if let Some(idx) = reuse {
        idx.check_dataset(data)?;
        if sweep.bits != [idx.t()] || sweep.tables != [idx.k() as u32] {
            return Err(AlcError::usage("a reused index fixes a single t and K"));
        }
    }
    let truths: Vec<Vec<usize>> = queries
        .iter()
        .map(|q| data.members_in_range(&q.vector, sweep.range))
        .collect::<alc_core::Result<_>>()?;
    let mut rows = Vec::new();
    for &t in &sweep.bits {
        for &k in &sweep.tables {
            let per_trial: Vec<Vec<(usize, Row)>> = (0..sweep.trials)
                .into_par_iter()
                .map(|trial| run_trial(data, queries, &truths, sweep, reuse, t, k, trial))
                .collect::<Result<_>>()?;
            let mut block: Vec<(usize, u32, Row)> = per_trial
                .into_iter()
                .enumerate()
                .flat_map(|(trial, rs)| rs.into_iter().map(move |(slot, r)| (slot, trial as u32, r)))
                .collect();
            block.sort_by_key(|(slot, trial, _)| (*slot, *trial));
            rows.extend(block.into_iter().map(|(_, _, r)| r));
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    data: &Dataset,
    queries: &[Query],
    truths: &[Vec<usize>],
    sweep: &Sweep,
    reuse: Option<&LshIndex>,
    t: u32,
    k: u32,
    trial: u32,
) -> Result<Vec<(usize, Row)>> {
    let indices: Vec<LshIndex> = match reuse {
        Some(idx) => vec![idx.clone()],
        None => (0..sweep.groups)
            .map(|g| {
                let seed = derive_seed(sweep.seed, trial as u64, g as u64);
                build_index_parallel(data, IndexParams::new(t, k, seed, sweep.mode)?)
            })
            .collect::<Result<_>>()?,
    };
    let mut out = Vec::new();
    for (qi, query) in queries.iter().enumerate() {
        let truth = &truths[qi];
        for (pi, p) in sweep.points.iter().enumerate() {
            let slot = qi * sweep.points.len() + pi;
            let mut row = Row {
                query: query.name.clone(),
                estimator: p.kind.name().into(),
                k,
                t,
                i: p.i_column(),
                s: p.budget,
                trial,
                estimate: None,
                truth: Some(truth.len() as u64),
                rel_error: None,
                elapsed_ms: None,
                samples_used: None,
                inspected: None,
                w: None,
                rel_bias: None,
                error: None,
            };
            match run_point(&indices, data, query, sweep, p, trial) {
                Ok(r) => {
                    row.estimate = Some(r.estimate);
                    if !truth.is_empty() {
                        row.rel_error = Some((r.estimate - truth.len() as f64).abs() / truth.len() as f64);
                    }
                    if sweep.timing {
                        row.elapsed_ms = r.elapsed.map(|d: Duration| d.as_secs_f64() * 1e3);
                    }
                    row.samples_used = Some(r.samples_used);
                    row.inspected = Some(r.elements_inspected);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            if let (Some(set), false) = (p.bias_set(), truth.is_empty()) {
                let idx = &indices[0];
                let bias = idx
                    .query(&query.vector)
                    .and_then(|ctx| diagnose_bias(idx, data, &ctx, &set, truth));
                match bias {
                    Ok(b) => {
                        row.w = Some(b.w);
                        row.rel_bias = Some(b.relative_bias);
                    }
                    Err(e) if row.error.is_none() => row.error = Some(e.to_string()),
                    Err(_) => {}
                }
            }
            out.push((slot, row));
        }
    }
    Ok(out)
}
