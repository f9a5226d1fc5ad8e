//! `depbe`: Berry–Esseen bounds for sums with a dependency graph, from the
//! command line.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when a verification ran
//! and failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "depbe", version, about = "Berry-Esseen bounds for sums with a dependency graph")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the theorem bounds (and with --all, the baselines) on a profile.
    Bounds(BoundsArgs),
    /// Exponent region map over (delta, alpha).
    Regimes(RegimesArgs),
    /// Monte Carlo certification of a bound on a family spec.
    Verify(VerifyArgs),
    /// Exact cumulants against the cumulant bound.
    CumulantCheck(CumulantCheckArgs),
    /// Smoothing-inequality right-hand side against the exact distance.
    FellerCheck(FellerCheckArgs),
    /// Write a family spec as JSON.
    Generate(GenerateArgs),
    /// U-statistic value, tuple-graph sizes and bound.
    Ustat(UstatArgs),
    /// Volatility estimators and the bound for the variance-rate estimator.
    Volatility(VolatilityArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Moment profile JSON.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub profile: Option<PathBuf>,
    /// Family spec JSON; the profile is computed from it.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Moment orders to compute when --spec is used.
    #[arg(long, value_delimiter = ',', default_value = "2.5,3,4")]
    pub deltas: Vec<f64>,
    /// Include the literature baselines.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct RegimesArgs {
    #[arg(long, default_value_t = 2.02)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub delta_step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub alpha_step: f64,
    /// Also write the region map as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Also write the winner changes along each delta column as CSV.
    #[arg(long)]
    pub boundaries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// linfty, linfty_refined, delta_ge3[:d], delta_2_3[:d] or best.
    #[arg(long, default_value = "best")]
    pub theorem: String,
    #[arg(long, default_value_t = depbe::montecarlo::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = depbe::montecarlo::DEFAULT_CONFIDENCE)]
    pub confidence: f64,
}

#[derive(Debug, Args)]
pub struct CumulantCheckArgs {
    /// `random`, or a family JSON file.
    #[arg(long, default_value = "random")]
    pub families: String,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Largest N of a random family.
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    #[arg(long, default_value_t = 6)]
    pub rmax: usize,
    /// Moment orders checked in addition to delta = r.
    #[arg(long, value_delimiter = ',', default_value = "2,2.5,3")]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FellerCheckArgs {
    /// A law (list of atoms), a family spec or a family JSON.
    #[arg(long)]
    pub law: PathBuf,
    #[arg(long = "T", value_delimiter = ',', default_value = "1,2,5,10")]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Clique,
    Window,
    ThreePoint,
    BernoulliDecay,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 1000)]
    pub blocks: usize,
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    /// rademacher, bernoulli:p, point:x, or x1:p1,x2:p2,...
    #[arg(long, default_value = "rademacher")]
    pub law: String,
    /// Number of inputs (window) or summands (three-point, bernoulli-decay).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// product, sum or mean
    #[arg(long, default_value = "product")]
    pub window: String,
    #[arg(long, default_value_t = 3.0)]
    pub delta: f64,
    /// Largest N of a random family.
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
}

#[derive(Debug, Args)]
pub struct UstatArgs {
    /// mean, var, absdiff or product
    #[arg(long)]
    pub kernel: String,
    /// One value per row.
    #[arg(long)]
    pub data: PathBuf,
    /// Maximal degree of the dependency graph of the data.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, default_value_t = 3.0)]
    pub delta: f64,
    /// Sum over tuples of E|f(X_a) - c_a|^delta; estimated when absent.
    #[arg(long)]
    pub a_delta: Option<f64>,
    /// V[V_n]; estimated when absent.
    #[arg(long)]
    pub var_vn: Option<f64>,
    /// Use the bounded-kernel bound with this sup norm.
    #[arg(long)]
    pub l: Option<f64>,
    /// Stationary variant with lim V[V_n]/n^(2l-1) = K^2.
    #[arg(long = "K")]
    pub k: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VolatilityArgs {
    /// Observation times t_0 = 0 < t_1 < ... (a leading 0 is added if missing).
    #[arg(long)]
    pub times: PathBuf,
    /// Increments X_1..X_n.
    #[arg(long)]
    pub returns: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    pub delta: f64,
    #[arg(long = "K")]
    pub k: f64,
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// E|X_i/kappa_i|^delta per increment; estimated from the data when absent.
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

fn main() {
    // usage errors are input errors (1); clap's own default would be 2
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        std::process::exit(if e.use_stderr() { 1 } else { 0 });
    });
    if let Some(t) = cli.threads {
        depbe::par::configure_threads(t);
    }
    if let Err(e) = commands::run(&cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
