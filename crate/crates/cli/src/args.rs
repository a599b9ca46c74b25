use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Lipschitz-bounded fitting of sparse samples with bounded deviations.
#[derive(Debug, Parser)]
#[command(name = "lipfit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a method and write the curve with its error band.
    Fit(FitArgs),
    /// Compute an LB-BD trade-off curve.
    Lbbd(LbbdArgs),
    /// Choose the (LB, BD) pair minimising a prediction error.
    Pem(PemArgs),
    /// Draw a random function and stratified samples from it.
    Simulate(SimulateArgs),
    /// Monte-Carlo comparison of methods by point-wise loss quartiles.
    Compare(CompareArgs),
    /// Synthetic sparse-series workflow with a borrowed curve.
    Workflow(WorkflowArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sample CSV (`x,y`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// avg, nn, pnn, li, pli, lipfit or plipfit.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub m: Option<f64>,
    /// Defaults to the smallest BD consistent with `--m`.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub periodic: bool,
    /// Points of the output and error grids.
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_b: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with defaults for any flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LbbdArgs {
    /// Sample CSV (`x,y` or `x1,...,xd,y`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `0,0.5,1`, `lin:a:b:n` or `geom:a:b:n`.
    #[arg(long)]
    pub m_grid: Option<String>,
    /// general or fast.
    #[arg(long)]
    pub engine: Option<String>,
    #[arg(long)]
    pub periodic: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_b: Option<f64>,
    /// Write the linear program at `--dump-lp-m` (default: first grid point).
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    #[arg(long)]
    pub dump_lp_m: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PemArgs {
    /// Sample CSV (`x,y`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Curve CSV (`m,gamma`).
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Curve used for the periodic family (default: `--curve`).
    #[arg(long)]
    pub periodic_curve: Option<PathBuf>,
    /// nn, li or lipfit (and periodic variants).
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated error measures: DSPWE, DIE, SPWE, IE.
    #[arg(long)]
    pub error: Option<String>,
    #[arg(long)]
    pub periodic: bool,
    /// Report both the ordinary and the periodic family.
    #[arg(long)]
    pub periodic_also: bool,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_b: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of break points.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub periodic: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Draws per equal-width stratum, e.g. `2,2,2,2`.
    #[arg(long)]
    pub strata: Option<String>,
    /// Points of the truth grid.
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain_b: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub periodic: bool,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub strata: Option<String>,
    /// Points of the evaluation grid.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// deviation-free or target.
    #[arg(long)]
    pub truth: Option<String>,
    /// `label=method*scale,...`.
    #[arg(long)]
    pub roster: Option<String>,
    /// `label=path` to a `replicate,x,fit` CSV; repeatable.
    #[arg(long)]
    pub external: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WorkflowArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points of each complete series.
    #[arg(long)]
    pub n_dense: Option<usize>,
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}
