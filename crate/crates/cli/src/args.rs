use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cluster-curriculum", version, about = "Centrality-ordered curricula and percolation geometry")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for training and history sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output file (written atomically); stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Feature file format; inferred from the extension when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<InputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Bin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary-probability centrality of every point.
    Centrality(CentralityArgs),
    /// Curriculum schedule and score curve from a ranking.
    Curriculum(CurriculumArgs),
    /// Percolation curve of the fitted confidence ellipsoid.
    Percolation(PercolationArgs),
    /// Synthetic V-shape experiment over several seeds.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    pub input: PathBuf,

    /// Neighbors per node; defaults to round(4 ln m).
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 0.8)]
    pub target_geomean: f64,

    /// Also write the weighted kNN graph as JSON.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,

    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Normal,
    Active,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainerChoice {
    Gaussian,
    Gmm,
}

#[derive(Debug, Args)]
pub struct CurriculumArgs {
    pub features: PathBuf,

    /// Ranking JSON written by `centrality`.
    pub ranking: PathBuf,

    #[arg(long)]
    pub base: Option<usize>,

    #[arg(long)]
    pub increment: Option<usize>,

    #[arg(long, value_enum)]
    pub mode: Option<Mode>,

    /// Required in active mode.
    #[arg(long)]
    pub active_size: Option<usize>,

    /// Clean reference features for scoring; the full feature set when absent.
    #[arg(long)]
    pub reference: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub trainer: Option<TrainerChoice>,

    /// Mixture components for the `gmm` trainer.
    #[arg(long)]
    pub components: Option<usize>,

    /// TOML or JSON file with any of the options above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PercolationArgs {
    pub input: PathBuf,

    #[arg(long, default_value_t = 200)]
    pub grid_size: usize,

    /// Adds `ridge * I` to the covariance.
    #[arg(long)]
    pub ridge: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Synthetic data spec (TOML or JSON).
    pub spec: PathBuf,

    /// Comma-separated seeds.
    #[arg(long)]
    pub seeds: Option<String>,

    #[arg(long)]
    pub base: Option<usize>,

    #[arg(long)]
    pub increment: Option<usize>,

    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub target_geomean: Option<f64>,

    /// Also runs active-set sweeps with this active-set size.
    #[arg(long)]
    pub active_size: Option<usize>,

    #[arg(long, value_enum)]
    pub trainer: Option<TrainerChoice>,

    #[arg(long)]
    pub components: Option<usize>,

    /// TOML or JSON file with pipeline parameters; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
