mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Kernel dissimilarities for mixed-type data, clustering and simulation studies.
#[derive(Debug, Parser)]
#[command(name = "kdsum", version, about)]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output prefix; files are written as `<out>.<kind>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a dissimilarity matrix.
    Distance(DistanceArgs),
    /// Select KDSUM bandwidths by cross-validation.
    Bandwidth(BandwidthArgs),
    /// Cluster a dissimilarity matrix.
    Cluster(ClusterArgs),
    /// Compare predicted labels with ground truth.
    Eval(EvalArgs),
    /// Distance, clustering and evaluation in one run.
    Pipeline(PipelineArgs),
    /// Generate a simulated dataset.
    Simulate(SimulateArgs),
    /// Cluster at every point of a bandwidth grid.
    Gridsearch(GridsearchArgs),
    /// Repeat generate, cluster and evaluate over many seeds.
    Montecarlo(MontecarloArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Data CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// JSON schema: a list of {name, kind, levels}.
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Continuous kernel: gaussian or epanechnikov.
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    /// Latin-hypercube starts besides the rule-of-thumb start.
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Objective evaluations per start (default 500 per variable).
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Cap unordered bandwidths at (g - 1) / g.
    #[arg(long)]
    pub aitken_cap: bool,
    /// Evaluate the objective on this many sampled rows when n is larger.
    #[arg(long)]
    pub subsample: Option<usize>,
    /// Smallest continuous bandwidth.
    #[arg(long, default_value_t = kdsum::DEFAULT_CONTINUOUS_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// kdsum, gower, huang, podani or wishart.
    #[arg(long, default_value = "kdsum")]
    pub metric: String,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Fixed bandwidths, comma separated, in column order.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "bandwidth_file"
    )]
    pub bandwidths: Option<Vec<f64>>,
    /// JSON file with bandwidths: a list, or the output of `kdsum bandwidth`.
    #[arg(long)]
    pub bandwidth_file: Option<PathBuf>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Matrix file written by `kdsum distance`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// hac/<linkage> or kmeans.
    #[arg(long, default_value = "hac/average")]
    pub algo: String,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Ground-truth labels.
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Comma-separated algorithms; `hac` expands to every linkage, `all` adds kmeans.
    #[arg(long, default_value = "hac")]
    pub algo: String,
    /// Clusters to cut (default: the number of true classes).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GeneratorArgs {
    /// Simulation 1 to 6.
    #[arg(long, conflicts_with = "generator")]
    pub sim: Option<u8>,
    /// gridsearch-continuous, gridsearch-categorical, gridsearch-categorical-2,
    /// gridsearch-mixed, sample-size or mixed.
    #[arg(long)]
    pub generator: Option<String>,
    /// Per-cluster sizes (sims), rows per cluster (sample-size) or n (mixed).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Overlap for the mixed generator.
    #[arg(long, default_value_t = 0.2)]
    pub overlap: f64,
    /// Share of rows in the first cluster for the mixed generator.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1)]
    pub continuous: usize,
    /// Level counts of the unordered variables of the mixed generator.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub unordered_levels: Vec<u32>,
    /// Level counts of the ordered variables of the mixed generator.
    #[arg(long, value_delimiter = ',', default_value = "4,4")]
    pub ordered_levels: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Args)]
pub struct GridsearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// One lo:hi:step axis per variable, or a single axis for all of them.
    #[arg(long = "grid", required = true)]
    pub grid: Vec<String>,
    #[arg(long, default_value = "kmeans")]
    pub algo: String,
    #[arg(long)]
    pub k: Option<usize>,
    /// Run grids with more than a million points.
    #[arg(long)]
    pub allow_large: bool,
    /// Skip the cross-validated point.
    #[arg(long)]
    pub no_mscv: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value = "kdsum")]
    pub metric: String,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Default: hac/average for sims, kmeans otherwise.
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<kdsum::Error>() {
        Some(e) if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot start {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
