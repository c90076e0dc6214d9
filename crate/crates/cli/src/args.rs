use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::output::OutputArgs;
use crate::range::{parse_counts, parse_values, Counts, Values};

/// Delivery-time analysis, converse bounds, coded-caching simulation and
/// physical-layer slope checks for the cache-aided MISO broadcast channel
/// with partial CSIT.
///
/// Value flags accept a number, a comma-separated list, or an inclusive
/// range start:stop:step. Exit codes: 0 success, 1 failed check, 2 usage error.
#[derive(Debug, Parser)]
#[command(name = "miso-cache", version)]
pub struct Cli {
    /// Worker threads for scans and Monte Carlo runs [default: available parallelism]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Achievable delivery times and GDoF over a grid of (K, mu, delta)
    Analyze(AnalyzeArgs),
    /// Converse lower bound on the delivery time and GDoF upper bound
    Bounds(BoundsArgs),
    /// Ratio of achievable time to the lower bound over a parameter scan
    GapScan(GapScanArgs),
    /// Bit-exact placement, delivery and decoding run
    Simulate(SimulateArgs),
    /// Monte Carlo estimate of the common and private layer GDoF
    PhySlope(PhySlopeArgs),
}

/// `--delta` alone, or `--alpha` together with `--beta`.
#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// CSIT uncertainty level alpha - beta (taken as alpha = delta, beta = 0)
    #[arg(long, value_parser = parse_values, conflicts_with_all = ["alpha", "beta"])]
    pub delta: Option<Values>,
    /// Cross-link strength level
    #[arg(long, value_parser = parse_values, requires = "beta")]
    pub alpha: Option<Values>,
    /// CSIT quality level
    #[arg(long, value_parser = parse_values, requires = "alpha")]
    pub beta: Option<Values>,
}

impl ChannelArgs {
    /// `(alpha, beta)` pairs in the order given, alpha outermost.
    pub fn points(&self) -> Result<Vec<(f64, f64)>, CliError> {
        match (&self.delta, &self.alpha, &self.beta) {
            (Some(d), None, None) => Ok(d.0.iter().map(|&d| (d, 0.0)).collect()),
            (None, Some(a), Some(b)) => Ok(a
                .0
                .iter()
                .flat_map(|&a| b.0.iter().map(move |&b| (a, b)))
                .collect()),
            _ => Err(CliError::Usage(
                "give either --delta or both --alpha and --beta".into(),
            )),
        }
    }

    pub fn single(&self) -> Result<(f64, f64), CliError> {
        match self.points()?[..] {
            [p] => Ok(p),
            _ => Err(CliError::Usage(
                "this command takes a single channel point".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Number of users
    #[arg(long = "K", value_parser = parse_counts)]
    pub k: Counts,
    /// Normalized cache size M/N
    #[arg(long, value_parser = parse_values)]
    pub mu: Values,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Number of users
    #[arg(long = "K", value_parser = parse_counts)]
    pub k: Counts,
    /// Number of files
    #[arg(long = "N", value_parser = parse_counts)]
    pub n: Counts,
    /// Cache size in files
    #[arg(long = "M", value_parser = parse_values)]
    pub m: Values,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    /// Every K <= K_max, N in [K, N_max], integer M in [0, N], delta grid
    Exhaustive,
    /// Fixed number of random (N, M, delta) per K
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeChoice {
    Both,
    Centralized,
    Decentralized,
}

#[derive(Debug, Clone, Args)]
pub struct GapScanArgs {
    #[arg(long, value_enum, default_value_t = GridKind::Exhaustive)]
    pub grid: GridKind,
    /// Largest K [default: 8 exhaustive, 100 sampled, 32 with --check-cen-decen]
    #[arg(long = "K-max")]
    pub k_max: Option<usize>,
    /// Largest N [default: 16 exhaustive, 500 sampled]
    #[arg(long = "N-max")]
    pub n_max: Option<usize>,
    /// Intervals of the delta grid on [0, 1] [default: 20, 100 with --check-cen-decen]
    #[arg(long)]
    pub delta_steps: Option<usize>,
    /// Intervals of the mu grid on [0, 1], used with --check-cen-decen
    #[arg(long, default_value_t = 100)]
    pub mu_steps: usize,
    /// Random points per K in a sampled scan
    #[arg(long = "samples-per-K", default_value_t = 1000)]
    pub samples_per_k: usize,
    #[arg(long, value_enum, default_value_t = SchemeChoice::Both)]
    pub scheme: SchemeChoice,
    /// Emit only the summary
    #[arg(long)]
    pub summary_only: bool,
    /// Scan the centralized-to-decentralized GDoF ratio over (K, mu, delta) instead
    #[arg(long)]
    pub check_cen_decen: bool,
    /// Base seed for sampled scans
    #[arg(long, env = "MISO_CACHE_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    Centralized,
    Decentralized,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub mode: SimMode,
    /// Number of users
    #[arg(long = "K")]
    pub k: usize,
    /// Number of files [default: K]
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// File size in bits
    #[arg(long = "F")]
    pub file_bits: usize,
    /// Integer cache parameter K*mu (centralized)
    #[arg(long)]
    pub t: Option<usize>,
    /// Normalized cache size (decentralized)
    #[arg(long)]
    pub mu: Option<f64>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Demanded files, one-based and distinct, e.g. 1,2 [default: 1..K]
    #[arg(long)]
    pub demands: Option<String>,
    /// Base seed for library content and placement
    #[arg(long, env = "MISO_CACHE_SEED")]
    pub seed: Option<u64>,
    /// Also write the binary transmission-log dump to this file
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PhySlopeArgs {
    /// Number of users (antennas)
    #[arg(long = "K", value_parser = parse_counts)]
    pub k: Counts,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Monte Carlo trials per SNR point
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// SNR grid as base-10 exponents of P
    #[arg(long = "log10-snr", value_parser = parse_values, default_value = "8:13:1")]
    pub log10_snr: Values,
    /// Accepted distance between fitted and predicted slopes
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Largest accepted residual variance of a slope fit
    #[arg(long, default_value_t = 0.05)]
    pub residual_limit: f64,
    /// Base seed for channel draws
    #[arg(long, env = "MISO_CACHE_SEED")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
