use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "likenet",
    version,
    about = "Likedness centrality and like-rate ensemble simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a graph as an edge list.
    Generate(GenerateArgs),
    /// Compute per-node centralities for a graph and rate matrix.
    Solve(SolveArgs),
    /// Sample and score a Monte-Carlo ensemble of (graph, rates) systems.
    Ensemble(EnsembleArgs),
    /// Turn ensemble records into plot-ready CSVs and a JSON summary.
    Analyze(AnalyzeArgs),
    /// Sweep the mutual rate of a coalition pair and record centralities.
    Coalition(CoalitionArgs),
    /// Compare random-rate stars with hub-dominated Barabási-Albert graphs.
    StarCompare(StarCompareArgs),
}

/// Settings shared by every subcommand. Flags override the config file;
/// each flag can also be set through a `LIKENET_*` environment variable.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, env = "LIKENET_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "LIKENET_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "LIKENET_N")]
    pub n: Option<usize>,
    #[arg(long, env = "LIKENET_K")]
    pub k: Option<usize>,
    #[arg(long, env = "LIKENET_SAMPLES")]
    pub samples: Option<usize>,
    #[arg(long, env = "LIKENET_LAMBDA")]
    pub lambda: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "LIKENET_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, env = "LIKENET_TOLERANCE")]
    pub tolerance: Option<f64>,
    #[arg(long = "max-iter", env = "LIKENET_MAX_ITER")]
    pub max_iter: Option<usize>,
    #[arg(long, env = "LIKENET_RELAXATION")]
    pub relaxation: Option<f64>,
    #[arg(long = "strategic-fraction", env = "LIKENET_STRATEGIC_FRACTION")]
    pub strategic_fraction: Option<f64>,
    /// Which end of the stability distribution counts as strategic.
    #[arg(long = "strategic-tail", env = "LIKENET_STRATEGIC_TAIL")]
    pub strategic_tail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ba,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Likedness,
    Eigenvector,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum, env = "LIKENET_MODEL", default_value = "ba")]
    pub model: Model,
    /// Output edge-list file; stdout when omitted.
    #[arg(long, env = "LIKENET_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Dense CSV or `i j rate` triplets.
    #[arg(long)]
    pub rates: PathBuf,
    #[arg(long, value_enum, env = "LIKENET_MEASURE", default_value = "likedness")]
    pub measure: Measure,
    /// Output CSV; stdout when omitted.
    #[arg(long, env = "LIKENET_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Output directory for records.jsonl, records.csv and summary.json.
    #[arg(long, env = "LIKENET_OUT")]
    pub out: PathBuf,
    /// Keep complete records already in the output and continue after them.
    #[arg(long)]
    pub resume: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Ensemble records (JSON lines).
    #[arg(long)]
    pub records: PathBuf,
    /// Use every record in `--records` as the strategic set and this file
    /// as the population, instead of classifying by stability.
    #[arg(long = "compare-with")]
    pub compare_with: Option<PathBuf>,
    /// Equal-probability bins for the rate representation curve.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[arg(long, env = "LIKENET_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CoalitionArgs {
    /// Graph edge list; use with `--rates`.
    #[arg(long, requires = "rates", conflicts_with = "records")]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub rates: Option<PathBuf>,
    /// Ensemble records; the most strategic record is rebuilt from its seeds.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Coalition members; defaults to the outlying adjacent pair.
    #[arg(long, requires = "b")]
    pub a: Option<usize>,
    #[arg(long, requires = "a")]
    pub b: Option<usize>,
    /// Comma-separated joint rates; defaults to 0, 0.25, ..., 5.
    #[arg(long = "joint-rates", value_delimiter = ',')]
    pub joint_rates: Vec<f64>,
    /// Bins for the reciprocity curve over outgoing rate.
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    #[arg(long, env = "LIKENET_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StarCompareArgs {
    #[arg(long = "star-samples", default_value_t = 1000)]
    pub star_samples: usize,
    /// Barabási-Albert records to draw the hub subset from.
    #[arg(long, conflicts_with = "ba_samples")]
    pub records: Option<PathBuf>,
    /// Run a fresh Barabási-Albert ensemble of this size instead.
    #[arg(long = "ba-samples")]
    pub ba_samples: Option<usize>,
    /// Output JSON file.
    #[arg(long, env = "LIKENET_OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}
