#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use alc::embeddings::{load_embeddings, write_embeddings};
use alc::fixture::{Fixture, FixtureSpec};
use alc::persist::{index_to_bytes, read_index};
use alc::runner::{rows_to_string, run_sweep, Point, Query, Sweep};
use alc_core::estimators::DEFAULT_THETA_REP;
use alc_core::{AngleRange, CountsMode, Dataset, EstimatorKind, HammingSet, IndexParams, LshIndex};

pub const GOLDEN_SEED: u64 = 2024;
pub const GOLDEN_DIM: usize = 8;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn golden_sweep() -> Sweep {
    let point = |kind, hamming: Option<HammingSet>, budget| Point { kind, hamming, budget };
    Sweep {
        bits: vec![6],
        tables: vec![4],
        seed: GOLDEN_SEED,
        mode: CountsMode::Auto,
        range: AngleRange::from_degrees(0.0, 45.0).unwrap(),
        points: vec![
            point(EstimatorKind::LshCount, Some(HammingSet::threshold(2)), 50),
            point(EstimatorKind::MultiProbeCount, None, 40),
            point(EstimatorKind::Spring, None, 50),
            point(EstimatorKind::MultiProbe, None, 40),
        ],
        probes: None,
        theta_rep: DEFAULT_THETA_REP,
        trials: 3,
        groups: 1,
        timing: false,
    }
}

pub fn golden_csv(data: &Dataset, queries: &[Query], index: &LshIndex) -> String {
    rows_to_string(&run_sweep(data, queries, &golden_sweep(), Some(index)).unwrap())
}

pub struct Golden {
    pub data: Dataset,
    pub queries: Vec<Query>,
    pub index_bytes: Vec<u8>,
    pub index: LshIndex,
    pub csv: String,
}

fn load_inputs(dir: &Path) -> (Dataset, Vec<Query>) {
    let data = load_embeddings(&dir.join("tiny.txt"), GOLDEN_DIM, None).unwrap();
    let qs = load_embeddings(&dir.join("tiny_queries.txt"), GOLDEN_DIM, None).unwrap();
    let queries = qs
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| Query {
            name: qs.label(i).unwrap().to_owned(),
            vector: v.clone(),
        })
        .collect();
    (data, queries)
}

pub fn load_golden() -> Golden {
    let dir = golden_dir();
    let (data, queries) = load_inputs(&dir);
    let path = dir.join("tiny.alc");
    let index_bytes = fs::read(&path).unwrap();
    let index = read_index(&index_bytes, &path).unwrap();
    let csv = fs::read_to_string(dir.join("tiny.csv")).unwrap();
    Golden {
        data,
        queries,
        index_bytes,
        index,
        csv,
    }
}

/// Rewrites the committed golden files.
pub fn regenerate_golden() {
    let dir = golden_dir();
    fs::create_dir_all(&dir).unwrap();
    let spec = FixtureSpec {
        n: 80,
        dim: GOLDEN_DIM,
        seed: 99,
        queries: vec![("near".into(), 12)],
        halo_factor: 1.0,
        inner_min_deg: 10.0,
        range_max_deg: 45.0,
        halo_max_deg: 60.0,
    };
    let f = Fixture::generate(spec).unwrap();
    let mut buf = Vec::new();
    write_embeddings(&mut buf, &f.data).unwrap();
    fs::write(dir.join("tiny.txt"), buf).unwrap();
    let names = f.queries.iter().map(|(n, _)| n.clone()).collect();
    let qs = Dataset::new(f.queries.iter().map(|(_, v)| v.clone()).collect(), Some(names)).unwrap();
    let mut buf = Vec::new();
    write_embeddings(&mut buf, &qs).unwrap();
    fs::write(dir.join("tiny_queries.txt"), buf).unwrap();
    let (data, queries) = load_inputs(&dir);
    let index = LshIndex::build(&data, IndexParams::new(6, 4, GOLDEN_SEED, CountsMode::Auto).unwrap()).unwrap();
    fs::write(dir.join("tiny.alc"), index_to_bytes(&index)).unwrap();
    fs::write(dir.join("tiny.csv"), golden_csv(&data, &queries, &index)).unwrap();
}
