use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ldg-radial", version)]
#[command(about = "Radial point-defect profiles of the 2D Landau-de Gennes model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Solve for (u, v); writes profile.csv and energy.json.
    Solve(RunArgs),
    /// Solve, then check the maximum-principle bounds; writes bounds.json.
    Verify(RunArgs),
    /// Solve on a truncated infinite domain and fit the r^-2 tail; writes tailfit.json.
    Asymptotics(RunArgs),
    /// Lowest Rayleigh quotient of the out-of-plane second variation; writes stability.json.
    Stability(RunArgs),
    /// Repeat a run over a list of values of one parameter; writes sweep.json.
    Sweep(SweepArgs),
    /// Reconstruct the full Q-tensor field on a polar grid; writes qfield.csv.
    Qfield(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Newton,
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcArg {
    /// Outer values fixed at the far-field state.
    Dirichlet,
    /// Outer values corrected by the predicted r^-2 terms.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    A2,
    B2,
    C2,
    K,
}

/// Every field is optional so that flags can be layered over a config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub b2: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Winding index, counted in half-turns.
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<i32>,
    /// Radius of a finite domain.
    #[arg(long = "R", conflicts_with_all = ["rmax", "infinite"])]
    pub radius: Option<f64>,
    /// Outer radius of the continuation ladder; implies --infinite.
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub infinite: bool,
    /// Number of grid intervals.
    #[arg(long)]
    pub n: Option<usize>,
    /// uniform | composite | geometric:RATIO
    #[arg(long)]
    pub grading: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub bc: Option<BcArg>,
    /// Accept b2 = 0 on the infinite domain (report-only diagnostics).
    #[arg(long)]
    pub allow_b_zero: bool,
    /// Output directory; defaults to $NEMATIC_PROFILE_OUT, then ./out.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Angular samples for qfield.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Inner radius of the stability support.
    #[arg(long)]
    pub support_lo: Option<f64>,
    /// Outer radius of the stability support.
    #[arg(long)]
    pub support_hi: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub axis: SweepAxis,
    /// Comma-separated values, run and reported in the given order.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
}
