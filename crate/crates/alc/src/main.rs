use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use alc::bench::{degrees, parse_estimator, parse_hamming, parse_mode, resolve_queries, ExperimentConfig};
use alc::embeddings::{load_embeddings, write_embeddings};
use alc::fixture::{Fixture, FixtureSpec};
use alc::persist::{load_index, save_index};
use alc::runner::{run_sweep, write_rows, Row, Sweep};
use alc::{build_index_parallel, AlcError, Result};
use alc_core::estimators::{plan_resources, SampleAdvice};
use alc_core::geometry::angle_histogram;
use alc_core::{Dataset, EstimatorKind, IndexParams, LshIndex};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "alc",
    version,
    about = "Angular range counting with locality-sensitive hashing"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Hash an embedding file into K tables and save the index.
    Build(BuildArgs),
    /// Exact count by brute force, with a 10-degree angle histogram.
    Oracle(OracleArgs),
    /// Run one estimator over repeated trials and print CSV rows.
    Estimate(EstimateArgs),
    /// Run a JSON-configured sweep and write CSV rows.
    Bench(BenchArgs),
    /// Write the seeded synthetic fixture as embedding and query files.
    Synth(SynthArgs),
    /// Recommend K, S and M for a target accuracy.
    Plan(PlanArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Embedding text file: token followed by `dim` floats per line.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    max_rows: Option<usize>,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let input = self
            .input
            .as_ref()
            .ok_or_else(|| AlcError::usage("--input is required"))?;
        let dim = self.dim.ok_or_else(|| AlcError::usage("--dim is required"))?;
        load_embeddings(input, dim, self.max_rows)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    bits: u32,
    #[arg(long)]
    tables: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// auto, dense or sparse.
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Dataset label to use as a query; repeatable.
    #[arg(long = "query")]
    queries: Vec<String>,
    /// Embedding-format file of query vectors.
    #[arg(long)]
    query_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    angle_min: f64,
    #[arg(long)]
    angle_max: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Index to check the dataset against. Vectors always come from --input.
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    query: QueryArgs,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Saved index; supplies t, K and the counts mode.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    tables: Option<u32>,
    #[arg(long, default_value = "auto")]
    mode: String,
    #[command(flatten)]
    query: QueryArgs,
    /// lsh-count, mpc, spring or multiprobe.
    #[arg(long)]
    estimator: String,
    /// Hamming distances for lsh-count: "a..b" or "a,b,c".
    #[arg(long)]
    hamming_set: Option<String>,
    /// Samples (lsh-count) or inspected occurrences (probing estimators).
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    /// Fixed probes per table instead of a global inspection budget.
    #[arg(long)]
    probes: Option<u64>,
    #[arg(long, default_value_t = 45.0)]
    theta_rep: f64,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    /// Median-of-means groups (odd).
    #[arg(long, default_value_t = 1)]
    groups: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the loaded index in every trial instead of fresh tables.
    #[arg(long)]
    reuse_index: bool,
    /// Leave elapsed_ms empty so that output is reproducible.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 25)]
    dim: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    queries_out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    bits: u32,
    #[arg(long, default_value_t = 0.0)]
    angle_min: f64,
    #[arg(long)]
    angle_max: f64,
    #[arg(long)]
    hamming_set: String,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    /// Expected sampling pool E[C_q(I)].
    #[arg(long)]
    pool: Option<f64>,
    /// Prior guess of the count.
    #[arg(long)]
    count_guess: Option<f64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| AlcError::io(path, e))?))
}

fn emit_rows(rows: &[Row], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_rows(rows, create(p)?),
        None => write_rows(rows, io::stdout().lock()),
    }
}

fn check_labels(index: &LshIndex, data: &Dataset) -> Result<()> {
    index.check_dataset(data)?;
    if let (Some(a), Some(b)) = (index.labels(), data.labels()) {
        if a != b {
            return Err(AlcError::usage("index labels differ from the input dataset"));
        }
    }
    Ok(())
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let params = IndexParams::new(a.bits, a.tables, a.seed, parse_mode(&a.mode)?)?;
    let data = a.data.load()?;
    let start = Instant::now();
    let index = build_index_parallel(&data, params)?;
    let elapsed = start.elapsed();
    save_index(&index, &a.out)?;
    println!("n = {}", index.n());
    for (k, table) in index.tables().iter().enumerate() {
        let b = table.buckets();
        let total: usize = b.buckets().map(|(_, ids)| ids.len()).sum();
        println!(
            "table {k}: {} non-empty buckets, {total} elements",
            b.nonempty_buckets()
        );
    }
    println!("build time: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    if a.data.input.is_none() {
        return Err(AlcError::usage("the oracle needs --input: index files hold no vectors"));
    }
    let data = a.data.load()?;
    if let Some(p) = &a.index {
        check_labels(&load_index(p)?, &data)?;
    }
    let range = degrees(a.query.angle_min, a.query.angle_max)?;
    let queries = resolve_queries(&data, &a.query.queries, a.query.query_file.as_deref())?;
    let mut out = io::stdout().lock();
    let w = |e| AlcError::io("<stdout>", e);
    for q in queries {
        let count = data.members_in_range(&q.vector, range)?.len();
        writeln!(out, "{}: {count}", q.name).map_err(w)?;
        for (i, c) in angle_histogram(&data, &q.vector, 10.0)?.iter().enumerate() {
            writeln!(out, "  {:>3}-{:<3} {c}", i * 10, i * 10 + 10).map_err(w)?;
        }
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<()> {
    let kind = parse_estimator(&a.estimator)?;
    let hamming = a.hamming_set.as_deref().map(parse_hamming).transpose()?;
    match (kind, &hamming) {
        (EstimatorKind::LshCount, None) => return Err(AlcError::usage("lsh-count needs --hamming-set")),
        (k, Some(_)) if k != EstimatorKind::LshCount => {
            return Err(AlcError::usage(format!("--hamming-set does not apply to {}", k.name())))
        }
        _ => {}
    }
    if a.probes.is_some() && !matches!(kind, EstimatorKind::MultiProbeCount | EstimatorKind::MultiProbe) {
        return Err(AlcError::usage("--probes applies only to mpc and multiprobe"));
    }
    let index = a.index.as_deref().map(load_index).transpose()?;
    let (t, k, mode) = match &index {
        Some(idx) => {
            if a.bits.is_some_and(|b| b != idx.t()) || a.tables.is_some_and(|k| k as usize != idx.k()) {
                return Err(AlcError::usage("--bits/--tables disagree with the index"));
            }
            (idx.t(), idx.k() as u32, idx.params().mode)
        }
        None => {
            if a.reuse_index {
                return Err(AlcError::usage("--reuse-index needs --index"));
            }
            let t = a.bits.ok_or_else(|| AlcError::usage("--bits or --index is required"))?;
            let k = a
                .tables
                .ok_or_else(|| AlcError::usage("--tables or --index is required"))?;
            (t, k, parse_mode(&a.mode)?)
        }
    };
    let range = degrees(a.query.angle_min, a.query.angle_max)?;
    let sweep = Sweep {
        bits: vec![t],
        tables: vec![k],
        seed: a.seed,
        mode,
        range,
        points: Sweep::points(&[kind], hamming.as_slice(), &[a.samples])?,
        probes: a.probes,
        theta_rep: a.theta_rep.to_radians(),
        trials: a.trials,
        groups: a.groups,
        timing: !a.no_timing,
    };
    sweep.validate()?;
    let data = a.data.load()?;
    if let Some(idx) = &index {
        check_labels(idx, &data)?;
    }
    let queries = resolve_queries(&data, &a.query.queries, a.query.query_file.as_deref())?;
    let reuse = if a.reuse_index { index.as_ref() } else { None };
    let rows = run_sweep(&data, &queries, &sweep, reuse)?;
    emit_rows(&rows, a.out.as_deref())
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let sweep = cfg.sweep()?;
    let (data, queries) = cfg.dataset()?;
    let index = cfg.index.as_deref().map(load_index).transpose()?;
    if let Some(idx) = &index {
        check_labels(idx, &data)?;
    }
    let rows = run_sweep(&data, &queries, &sweep, index.as_ref())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed; see the error column", rows.len());
    }
    emit_rows(&rows, a.out.as_deref().or(cfg.output.as_deref()))
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let mut spec = FixtureSpec::standard(a.seed);
    spec.n = a.n;
    spec.dim = a.dim;
    let f = Fixture::generate(spec)?;
    let mut out = create(&a.out)?;
    write_embeddings(&mut out, &f.data).map_err(|e| AlcError::io(&a.out, e))?;
    out.flush().map_err(|e| AlcError::io(&a.out, e))?;
    let names = f.queries.iter().map(|(n, _)| n.clone()).collect();
    let qs = Dataset::new(f.queries.iter().map(|(_, v)| v.clone()).collect(), Some(names))?;
    let mut qout = create(&a.queries_out)?;
    write_embeddings(&mut qout, &qs).map_err(|e| AlcError::io(&a.queries_out, e))?;
    qout.flush().map_err(|e| AlcError::io(&a.queries_out, e))?;
    for ((name, _), c) in f.queries.iter().zip(f.truth_counts()) {
        println!("{name}: {c} within {} degrees", f.spec.range_max_deg);
    }
    Ok(())
}

fn cmd_plan(a: PlanArgs) -> Result<()> {
    let range = degrees(a.angle_min, a.angle_max)?;
    let set = parse_hamming(&a.hamming_set)?;
    let adv = plan_resources(a.bits, range, &set, a.epsilon, a.delta, a.pool, a.count_guess)?;
    println!("p_min = {}", adv.p_min);
    println!("tables K = {}", adv.tables);
    println!("groups M = {}", adv.groups);
    match adv.samples {
        SampleAdvice::Samples(s) => println!("samples S = {s}"),
        SampleAdvice::Symbolic {
            needs_expected_pool,
            needs_count_guess,
        } => {
            let mut missing = Vec::new();
            if needs_expected_pool {
                missing.push("--pool");
            }
            if needs_count_guess {
                missing.push("--count-guess");
            }
            println!(
                "samples S = (1 + 1/eps^2) * E[C_q(I)] / (|A_q| * p_min); supply {}",
                missing.join(" and ")
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.cmd {
        Cmd::Build(a) => cmd_build(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Estimate(a) => cmd_estimate(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Plan(a) => cmd_plan(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
