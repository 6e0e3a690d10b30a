//! Monte-Carlo ensembles of random (graph, rate matrix) systems.
//!
//! Every record is a pure function of `(config, master_seed, record_index)`:
//! the graph and rate seeds are derived from the master seed by a
//! counter-based mix, so records can be computed on any number of workers and
//! still come out bit-identical. Records are written in `record_index` order.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, generate_ba, Graph};
use crate::likedness::SolverOptions;
use crate::rates::RateMatrix;
use crate::stability::{stability, GradientOptions, StrategicTail};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub sample_count: usize,
    pub n: usize,
    pub k: usize,
    pub rate_lambda: f64,
    pub master_seed: u64,
    pub solver: SolverOptions,
    pub strategic_fraction: f64,
    pub strategic_tail: StrategicTail,
    /// Worker threads; 0 means one per available core. Does not affect
    /// results, so it is left out of serialized output.
    #[serde(skip_serializing, default)]
    pub workers: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            sample_count: 10_000,
            n: 10,
            k: 2,
            rate_lambda: 1.0,
            master_seed: 0,
            solver: SolverOptions::default(),
            strategic_fraction: 0.001,
            strategic_tail: StrategicTail::Highest,
            workers: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 1 {
            return Err(Error::InvalidParameter("sample_count must be >= 1".into()));
        }
        if !(self.rate_lambda.is_finite() && self.rate_lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate_lambda must be > 0, got {}",
                self.rate_lambda
            )));
        }
        if self.k < 1 || self.n < self.k || self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "need n >= k >= 1 and n >= 2, got n={}, k={}",
                self.n, self.k
            )));
        }
        if !(self.strategic_fraction > 0.0 && self.strategic_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "strategic_fraction must lie in (0, 1), got {}",
                self.strategic_fraction
            )));
        }
        self.solver.validate()
    }

    /// Applies one `key = value` setting. Accepts the field names plus the
    /// short CLI spellings (`samples`, `lambda`, `seed`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "sample_count" | "samples" => self.sample_count = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "rate_lambda" | "lambda" => self.rate_lambda = parse(key, value)?,
            "master_seed" | "seed" => self.master_seed = parse(key, value)?,
            "tolerance" => self.solver.tolerance = parse(key, value)?,
            "max_iterations" | "max_iter" | "max-iter" => {
                self.solver.max_iterations = parse(key, value)?
            }
            "relaxation" => self.solver.relaxation = parse(key, value)?,
            "strategic_fraction" | "strategic-fraction" => {
                self.strategic_fraction = parse(key, value)?
            }
            "strategic_tail" | "strategic-tail" => self.strategic_tail = value.parse()?,
            "workers" => self.workers = parse(key, value)?,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown config key `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Parses flat `key = value` text on top of `self`. `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
        }
        Ok(())
    }

    pub fn to_kv_text(&self) -> String {
        format!(
            "sample_count = {}\nn = {}\nk = {}\nrate_lambda = {}\nmaster_seed = {}\n\
             tolerance = {:e}\nmax_iterations = {}\nrelaxation = {}\n\
             strategic_fraction = {}\nstrategic_tail = {}\nworkers = {}\n",
            self.sample_count,
            self.n,
            self.k,
            self.rate_lambda,
            self.master_seed,
            self.solver.tolerance,
            self.solver.max_iterations,
            self.solver.relaxation,
            self.strategic_fraction,
            self.strategic_tail,
            self.workers,
        )
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `stream` of record `index`, mixed from the master seed.
pub fn derive_seed(master_seed: u64, index: u64, stream: u64) -> u64 {
    let counter = index.wrapping_mul(2).wrapping_add(stream);
    splitmix64(splitmix64(master_seed) ^ splitmix64(counter.wrapping_mul(GOLDEN_GAMMA)))
}

/// Independent Exp(`rate_lambda`) draws on both directions of every edge.
pub fn sample_rates(g: &Graph, rate_lambda: f64, seed: u64) -> Result<RateMatrix> {
    let dist = Exp::new(rate_lambda)
        .map_err(|e| Error::InvalidParameter(format!("rate_lambda {rate_lambda}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = RateMatrix::zeros(g.node_count());
    for (i, j) in g.directed_edges() {
        r.set(i, j, dist.sample(&mut rng))?;
    }
    Ok(r)
}

/// One directed like: `liker` likes `liked` at `rate`, i.e. `R[liked][liker]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutgoingRate {
    pub liker: usize,
    pub liked: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemRecord {
    pub record_index: u64,
    pub graph_seed: u64,
    pub rate_seed: u64,
    pub stability: f64,
    pub gradient_sq_sum: f64,
    pub degree_histogram: Vec<usize>,
    pub degree_stddev: f64,
    pub mean_path_length: f64,
    pub mean_local_clustering: f64,
    pub outgoing_rates: Vec<OutgoingRate>,
    pub solver_converged: bool,
}

impl SystemRecord {
    pub fn max_degree(&self) -> usize {
        self.degree_histogram
            .iter()
            .rposition(|&c| c > 0)
            .unwrap_or(0)
    }

    /// Regenerates the record's graph and rate matrix from its seeds.
    pub fn rebuild(&self, config: &EnsembleConfig) -> Result<(Graph, RateMatrix)> {
        let g = generate_ba(config.n, config.k, self.graph_seed)?;
        let r = sample_rates(&g, config.rate_lambda, self.rate_seed)?;
        Ok((g, r))
    }

    /// Rate matrix recovered from the stored outgoing rates.
    pub fn rate_matrix(&self, n: usize) -> Result<RateMatrix> {
        let mut r = RateMatrix::zeros(n);
        for o in &self.outgoing_rates {
            r.set(o.liked, o.liker, o.rate)?;
        }
        Ok(r)
    }
}

/// Builds and scores the system `(G, R)` behind record `index`.
pub fn evaluate_record(config: &EnsembleConfig, index: u64) -> Result<SystemRecord> {
    let graph_seed = derive_seed(config.master_seed, index, 0);
    let rate_seed = derive_seed(config.master_seed, index, 1);
    let g = generate_ba(config.n, config.k, graph_seed)?;
    let r = sample_rates(&g, config.rate_lambda, rate_seed)?;
    let s = stability(&g, &r, &config.solver, &GradientOptions::default())?;
    let outgoing_rates = g
        .directed_edges()
        .map(|(liker, liked)| OutgoingRate {
            liker,
            liked,
            rate: r.get(liked, liker),
        })
        .collect();
    Ok(SystemRecord {
        record_index: index,
        graph_seed,
        rate_seed,
        stability: s.stability,
        gradient_sq_sum: s.gradient_sq_sum,
        degree_histogram: graph::degree_histogram(&g),
        degree_stddev: graph::degree_stddev(&g),
        mean_path_length: graph::mean_path_length(&g)?,
        mean_local_clustering: graph::mean_local_clustering(&g),
        outgoing_rates,
        solver_converged: s.solver_converged,
    })
}

pub const SUMMARY_QUANTILES: [f64; 11] = [
    0.0, 0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 1.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub count: usize,
    pub nonconverged: usize,
    pub stability_quantiles: Vec<Quantile>,
    pub mean_stability: f64,
    pub config: EnsembleConfig,
}

impl EnsembleSummary {
    pub fn from_stabilities(
        config: &EnsembleConfig,
        stabilities: &[f64],
        nonconverged: usize,
    ) -> Self {
        let mut sorted = stabilities.to_vec();
        sorted.sort_by(f64::total_cmp);
        let stability_quantiles = SUMMARY_QUANTILES
            .iter()
            .filter_map(|&q| stats::quantile_sorted(&sorted, q).map(|value| Quantile { q, value }))
            .collect();
        Self {
            count: stabilities.len(),
            nonconverged,
            stability_quantiles,
            mean_stability: stats::mean(stabilities).unwrap_or(f64::NAN),
            config: config.clone(),
        }
    }
}

/// Receives records in `record_index` order.
pub trait RecordSink {
    fn accept(&mut self, record: &SystemRecord) -> Result<()>;
}

impl RecordSink for Vec<SystemRecord> {
    fn accept(&mut self, record: &SystemRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))
}

/// Evaluates records `start..config.sample_count` and streams them to `sink`.
///
/// Work is done in parallel batches; each batch is handed to the sink in
/// index order, so output does not depend on the worker count.
pub fn run_ensemble_from(
    config: &EnsembleConfig,
    start: u64,
    sink: &mut dyn RecordSink,
) -> Result<(Vec<f64>, usize)> {
    config.validate()?;
    let pool = build_pool(config.workers)?;
    let total = config.sample_count as u64;
    let batch = (pool.current_num_threads() as u64 * 32).max(256);
    let mut stabilities = Vec::with_capacity((total - start.min(total)) as usize);
    let mut nonconverged = 0;
    let mut next_report = 1;
    let mut index = start;
    while index < total {
        let end = (index + batch).min(total);
        let records: Vec<SystemRecord> = pool.install(|| {
            (index..end)
                .into_par_iter()
                .map(|i| evaluate_record(config, i))
                .collect::<Result<_>>()
        })?;
        for rec in &records {
            sink.accept(rec)?;
            stabilities.push(rec.stability);
            nonconverged += usize::from(!rec.solver_converged);
        }
        index = end;
        while next_report <= 10 && index * 10 >= total * next_report {
            info!("ensemble {}% ({index}/{total} records)", next_report * 10);
            next_report += 1;
        }
    }
    Ok((stabilities, nonconverged))
}

pub fn run_ensemble(config: &EnsembleConfig, sink: &mut dyn RecordSink) -> Result<EnsembleSummary> {
    let (stabilities, nonconverged) = run_ensemble_from(config, 0, sink)?;
    Ok(EnsembleSummary::from_stabilities(
        config,
        &stabilities,
        nonconverged,
    ))
}

pub const CSV_COLUMNS: [&str; 7] = [
    "record_index",
    "stability",
    "gradient_sq_sum",
    "degree_stddev",
    "mean_path_length",
    "mean_local_clustering",
    "solver_converged",
];

pub fn csv_row(r: &SystemRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}\n",
        r.record_index,
        r.stability,
        r.gradient_sq_sum,
        r.degree_stddev,
        r.mean_path_length,
        r.mean_local_clustering,
        r.solver_converged
    )
}

/// Writes the JSON-lines record file and its numeric CSV sidecar.
pub struct RecordFiles {
    jsonl: BufWriter<File>,
    csv: BufWriter<File>,
}

impl RecordFiles {
    pub fn create(jsonl_path: &Path, csv_path: &Path) -> Result<Self> {
        let jsonl = BufWriter::new(File::create(jsonl_path)?);
        let mut csv = BufWriter::new(File::create(csv_path)?);
        writeln!(csv, "{}", CSV_COLUMNS.join(","))?;
        Ok(Self { jsonl, csv })
    }

    /// Reopens existing files for appending after `records` already on disk;
    /// the sidecar is rewritten from them first.
    pub fn resume(jsonl_path: &Path, csv_path: &Path, records: &[SystemRecord]) -> Result<Self> {
        let mut body = String::new();
        for r in records {
            body.push_str(&serde_json::to_string(r)?);
            body.push('\n');
        }
        fs::write(jsonl_path, body)?;
        let mut csv = format!("{}\n", CSV_COLUMNS.join(","));
        for r in records {
            csv.push_str(&csv_row(r));
        }
        fs::write(csv_path, csv)?;
        let open = |p: &Path| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(OpenOptions::new().append(true).open(p)?))
        };
        Ok(Self {
            jsonl: open(jsonl_path)?,
            csv: open(csv_path)?,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.jsonl.flush()?;
        self.csv.flush()?;
        Ok(())
    }
}

impl RecordSink for RecordFiles {
    fn accept(&mut self, record: &SystemRecord) -> Result<()> {
        serde_json::to_writer(&mut self.jsonl, record)?;
        self.jsonl.write_all(b"\n")?;
        self.csv.write_all(csv_row(record).as_bytes())?;
        Ok(())
    }
}

/// Reads a JSON-lines record file. A truncated final line (from an
/// interrupted run) is dropped when `allow_partial_tail` is set.
pub fn read_records(path: &Path, allow_partial_tail: bool) -> Result<Vec<SystemRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut records = Vec::with_capacity(lines.len());
    let last = lines.len().saturating_sub(1);
    for (idx, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SystemRecord>(line) {
            Ok(r) => records.push(r),
            Err(_) if allow_partial_tail && idx == last => break,
            Err(e) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(records)
}

/// Runs (or resumes) an ensemble into `<jsonl>`, `<csv>` and `<summary>`.
///
/// With `resume`, complete records already present in the JSONL file are
/// kept when they form the prefix `0..m` and the run continues from `m`.
pub fn run_ensemble_to_files(
    config: &EnsembleConfig,
    jsonl_path: &Path,
    csv_path: &Path,
    summary_path: &Path,
    resume: bool,
) -> Result<EnsembleSummary> {
    config.validate()?;
    let existing = if resume && jsonl_path.exists() {
        let mut recs = read_records(jsonl_path, true)?;
        let prefix = recs
            .iter()
            .enumerate()
            .take_while(|(i, r)| r.record_index == *i as u64)
            .count()
            .min(config.sample_count);
        recs.truncate(prefix);
        recs
    } else {
        Vec::new()
    };
    let mut files = if existing.is_empty() {
        RecordFiles::create(jsonl_path, csv_path)?
    } else {
        info!("resuming after {} existing records", existing.len());
        RecordFiles::resume(jsonl_path, csv_path, &existing)?
    };
    let outcome = run_ensemble_from(config, existing.len() as u64, &mut files);
    let (new_stabilities, new_nonconverged) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let _ = files.finish();
            return Err(e);
        }
    };
    files.finish()?;
    let mut stabilities: Vec<f64> = existing.iter().map(|r| r.stability).collect();
    stabilities.extend(new_stabilities);
    let nonconverged = existing.iter().filter(|r| !r.solver_converged).count() + new_nonconverged;
    let summary = EnsembleSummary::from_stabilities(config, &stabilities, nonconverged);
    fs::write(summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}
