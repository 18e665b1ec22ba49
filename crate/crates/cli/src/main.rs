//! `graphcomplete` command-line tool.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{GraphMethod, SamplingKind};
use graphcomplete::eval::SweepSampling;

#[derive(Debug, Parser)]
#[command(name = "graphcomplete", version, about = "Matrix completion on graphs: data generation, graph building, solving and evaluation")]
pub struct Cli {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Global RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic community-structured dataset.
    Synth(SynthArgs),
    /// Carve a target block and side-information blocks out of a ratings file.
    Ingest(IngestArgs),
    /// Build a row or column graph from a feature block.
    BuildGraph(BuildGraphArgs),
    /// Complete a matrix from observed entries.
    Solve(SolveArgs),
    /// Recovery error versus observation level for several method variants.
    Sweep(SweepArgs),
    /// Cross-validate the regularization weights.
    Cv(CvArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub row_communities: Option<usize>,
    #[arg(long)]
    pub col_communities: Option<usize>,
    #[arg(long)]
    pub min_community_size: Option<usize>,
    #[arg(long)]
    pub k_intra: Option<usize>,
    /// Target share of cross-community edges in each graph.
    #[arg(long)]
    pub error_fraction: Option<f64>,
    /// Add discretized Laplacian noise with this scale.
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingKind>,
    /// Observed fraction (uniform) or target density (power law).
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Power-law epochs; overrides the density target.
    #[arg(long)]
    pub epochs: Option<u32>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Ratings file, one `user<d>item<d>rating[<d>timestamp]` record per line.
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Field delimiter (`::` for MovieLens 10M).
    #[arg(long)]
    pub delimiter: Option<String>,
    #[arg(long)]
    pub rating_min: Option<f64>,
    #[arg(long)]
    pub rating_max: Option<f64>,
    /// Number of users in the target block.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Number of movies in the target block.
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub row_percentile: Option<f64>,
    #[arg(long)]
    pub col_percentile: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Entities {
    /// Rows of the feature block are the graph vertices.
    Rows,
    /// Columns of the feature block are the graph vertices.
    Cols,
}

#[derive(Debug, Args)]
pub struct BuildGraphArgs {
    /// Feature block as `i j value` triplets.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum)]
    pub entities: Entities,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub method: Option<GraphMethod>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub min_common: Option<usize>,
    /// Ignore zero distances when anchoring the kernel.
    #[arg(long)]
    pub exclude_zero_dmin: bool,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct SolverFlags {
    #[arg(long)]
    pub gamma_n: Option<f64>,
    #[arg(long)]
    pub gamma_r: Option<f64>,
    #[arg(long)]
    pub gamma_c: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    #[arg(long)]
    pub cg_tol: Option<f64>,
    #[arg(long)]
    pub cg_max_iter: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct GraphInputs {
    /// Row graph edge list.
    #[arg(long)]
    pub row_graph: Option<PathBuf>,
    /// Column graph edge list.
    #[arg(long)]
    pub col_graph: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct GridFlags {
    #[arg(long)]
    pub folds: Option<usize>,
    /// Comma-separated candidates for gamma_n.
    #[arg(long, value_delimiter = ',')]
    pub grid_gamma_n: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_gamma_r: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_gamma_c: Option<Vec<f64>>,
    /// Clip predictions to `lo,hi` before scoring.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub clip: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Observed entries as `i j value` triplets.
    #[arg(long)]
    pub observations: PathBuf,
    #[command(flatten)]
    pub graphs: GraphInputs,
    /// Held-out entries to score the recovered matrix on.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub clip: Option<Vec<f64>>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub observations: PathBuf,
    #[command(flatten)]
    pub graphs: GraphInputs,
    #[arg(long)]
    pub out: PathBuf,
    /// nuclear_only, graphs_only or combined.
    #[arg(long)]
    pub variant: Option<String>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Ground-truth matrix (dense CSV) used for scoring.
    #[arg(long)]
    pub truth: PathBuf,
    /// Matrix the training values are read from; defaults to the truth.
    #[arg(long)]
    pub observable: Option<PathBuf>,
    #[command(flatten)]
    pub graphs: GraphInputs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub sampling: Option<SweepSamplingArg>,
    /// Comma-separated method variants.
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[command(flatten)]
    pub grid: GridFlags,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepSamplingArg {
    Uniform,
    PowerLaw,
}

impl From<SweepSamplingArg> for SweepSampling {
    fn from(s: SweepSamplingArg) -> Self {
        match s {
            SweepSamplingArg::Uniform => SweepSampling::Uniform,
            SweepSamplingArg::PowerLaw => SweepSampling::PowerLaw,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
