use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Simulation and limit laws for continuous vs grid maxima of Gaussian fields.
#[derive(Debug, Parser)]
#[command(name = "gaussmax", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// JSON file with the subcommand's parameters; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write CSV and a run manifest here instead of printing to stdout.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Exit with status 3 on soft flags (non-converged, too few hits, failed criteria).
    #[arg(long, global = true)]
    pub strict: bool,
    /// Cap on total lattice work (also read from GAUSSMAX_WORK_CAP).
    #[arg(long, global = true)]
    pub work_cap: Option<u128>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one field realisation on a lattice.
    SimulateField(SimulateFieldArgs),
    /// Monte Carlo estimate of a Pickands-type constant.
    EstimatePickands(EstimatePickandsArgs),
    /// Evaluate a limiting joint distribution function.
    EvalLimit(EvalLimitArgs),
    /// Joint law of the normalised maxima against its limit.
    RunExperiment(RunExperimentArgs),
    /// Box exceedance probabilities against the tail asymptotics.
    TailCheck(TailCheckArgs),
    /// Grid-vs-fine maximum gap as the grid is refined.
    DenseStudy(DenseStudyArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Sets both alpha1 and alpha2.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldFormat {
    Csv,
    Gfld,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateFieldArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    /// Sets both t1 and t2.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dy: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<FieldFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    ShiftAveraged,
    Naive,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatePickandsArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Second index for the joint constant (default: alpha).
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Grid spacing: estimate the discrete constant.
    #[arg(long)]
    pub a: Option<f64>,
    /// Grid spacings of the joint constant.
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated λ ladder; three or more windows also report convergence.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Sparse,
    Pickands,
    Dense,
}

#[derive(Debug, Clone, Args)]
pub struct EvalLimitArgs {
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Joint constant at the shifted arguments (Pickands regime only).
    #[arg(long)]
    pub joint: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Square horizon T1 = T2 = T.
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated ladder of square horizons.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Grid spacing on both axes (sparse and dense grids).
    #[arg(long)]
    pub p: Option<f64>,
    /// Scaled spacing on both axes (Pickands grids).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub fine_dx: Option<f64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub allow_coarse_proxy: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TailCheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Box edges "h1,h2".
    #[arg(long = "box", value_delimiter = ',')]
    pub box_size: Option<Vec<f64>>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',')]
    pub u: Option<Vec<f64>>,
    #[arg(long)]
    pub fine_dx: Option<f64>,
    #[arg(long)]
    pub fine_dy: Option<f64>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Also check a sparse grid of this spacing.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct DenseStudyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "box", value_delimiter = ',')]
    pub box_size: Option<Vec<f64>>,
    #[arg(long)]
    pub u: Option<f64>,
    /// Comma-separated grid spacings, coarse to fine.
    #[arg(long, value_delimiter = ',')]
    pub a_list: Option<Vec<f64>>,
    #[arg(long)]
    pub fine_dx: Option<f64>,
    #[arg(long)]
    pub reps: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    /// Comma-separated criterion numbers (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}
