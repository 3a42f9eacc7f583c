use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "hgr",
    version,
    about = "Kernel-based maximal correlation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one indicator on a pair of variables.
    Compute(ComputeArgs),
    /// HGR-KB over a grid of kernel degrees.
    Scan(ScanArgs),
    /// Indicators against oracle values on synthetic relations.
    Detect(DetectArgs),
    /// Repeat computations and report their spread.
    Determinism(DeterminismArgs),
    /// Time HGR-SK against the iterative HGR-KB solver.
    Bench(BenchArgs),
    /// Kernel coefficients, projections and a train/test probe.
    Inspect(InspectArgs),
    /// Fairness-constrained training with cross-validation.
    Train(TrainArgs),
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Compute(_) => "compute",
            Command::Scan(_) => "scan",
            Command::Detect(_) => "detect",
            Command::Determinism(_) => "determinism",
            Command::Bench(_) => "bench",
            Command::Inspect(_) => "inspect",
            Command::Train(_) => "train",
            Command::Generate(_) => "generate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Kb,
    Sk,
    Rdc,
    Pearson,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kb => "kb",
            Method::Sk => "sk",
            Method::Rdc => "rdc",
            Method::Pearson => "pearson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Eigen,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PenalizerArg {
    Kb,
    Sk,
    None,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Columns to pair, as `A,B` (default: the first two).
    #[arg(long)]
    pub columns: Option<String>,
    /// Synthetic data, `relation:n=..:sigma=..[:seed=..]`.
    #[arg(long)]
    pub synthetic: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ComputeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "kb")]
    pub method: Method,
    /// Kernel degrees `h,k` for kb.
    #[arg(long, default_value = "5,5")]
    pub degrees: String,
    /// Kernel degree for sk.
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Seed for rdc.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "eigen")]
    pub solver: Solver,
    #[arg(long, default_value_t = 1e-9)]
    pub ridge: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    /// Largest degrees `H,K`.
    #[arg(long, default_value = "5,5")]
    pub max_degrees: String,
    /// Also write the grid as a CSV matrix.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "linear,quadratic,cubic,circular,sin_of_square"
    )]
    pub relations: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.5")]
    pub sigmas: Vec<f64>,
    /// Number of seeds, `0..S`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "kb,sk,rdc,pearson"
    )]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value = "5,5")]
    pub degrees: String,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Keep the data at seed 0 and vary only the method seeds.
    #[arg(long)]
    pub fixed_data: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeterminismArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 30)]
    pub runs: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "kb,sk,rdc")]
    pub methods: Vec<Method>,
    #[arg(long, default_value = "5,5")]
    pub degrees: String,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Relation and noise used for the timing data.
    #[arg(long, default_value = "quadratic")]
    pub relation: String,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InspectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "2,1")]
    pub degrees: String,
    /// Fraction of rows held out for testing.
    #[arg(long)]
    pub test_split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Write `a,b,f,g,test` per row.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// CSV path, or `synthetic[:n=..][:seed=..]` for the built-in fairness data.
    #[arg(long)]
    pub data: String,
    /// `target=NAME,protected=NAME[,categorical=NAME...][,task=regression|binary]`.
    #[arg(long)]
    pub schema: Option<String>,
    #[arg(long, value_enum, default_value = "kb")]
    pub penalizer: PenalizerArg,
    #[arg(long, default_value_t = 0.3)]
    pub tau: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dual_lr: f64,
    #[arg(long, value_delimiter = ',', default_value = "32,32")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value = "5,5")]
    pub degrees: String,
    #[arg(long, default_value_t = 5)]
    pub degree: usize,
    /// Include per-epoch trajectories in the output.
    #[arg(long)]
    pub trajectories: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    /// Pair data, `relation:n=..:sigma=..[:seed=..]`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Fairness data, `n=..[:seed=..]`.
    #[arg(long)]
    pub fairness: Option<String>,
    /// Output file (default: stdout, without a report).
    #[arg(long)]
    pub output: Option<PathBuf>,
}
