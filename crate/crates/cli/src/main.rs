mod analyze;
mod output;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordpat_core::pattern::{TieBreakPolicy, DEFAULT_EPSILON, DEFAULT_SEED};

/// Exit status for invalid arguments.
pub const EXIT_USAGE: u8 = 2;
/// At least one input could not be decoded or analyzed.
pub const EXIT_DECODE: u8 = 3;
/// A theory check disagreed with the published constants.
pub const EXIT_MISMATCH: u8 = 4;

/// Smoothness, curve structure, entropy and complexity of 2x2 ordinal patterns.
#[derive(Parser)]
#[command(name = "ordpat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze image or matrix files (directories are scanned, not recursed)
    Analyze(analyze::AnalyzeArgs),
    /// Generate synthetic images and analyze them
    Simulate(simulate::SimulateArgs),
    /// Recompute the white-noise theory from all 9! block orderings
    Verify(verify::VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TieMode {
    Noise,
    Det,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// `RxC` pair such as `10x10`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| format!("{t:?} is not a positive integer"))
        };
        Ok(Dims {
            rows: parse(r)?,
            cols: parse(c)?,
        })
    }
}

/// Options shared by `analyze` and `simulate`.
#[derive(Args, Clone, Debug)]
pub struct CommonArgs {
    /// Delay between window pixels; repeat for a sweep
    #[arg(long = "delay", default_value = "1", value_parser = clap::value_parser!(u32).range(1..))]
    pub delays: Vec<u32>,

    /// Tie breaking: seeded noise or flat-index order
    #[arg(long, value_enum, default_value_t = TieMode::Noise)]
    pub tie: TieMode,

    /// Tie-breaking amplitude relative to the smallest value gap, in (0, 1]
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Append the 24 pattern frequencies p1..p24
    #[arg(long)]
    pub patterns: bool,

    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    pub fn policy(&self) -> Result<TieBreakPolicy, String> {
        let policy = match self.tie {
            TieMode::Noise => TieBreakPolicy::noise(self.epsilon, self.seed),
            TieMode::Det => TieBreakPolicy::deterministic(self.epsilon),
        };
        policy.validate().map_err(|e| e.to_string())?;
        Ok(policy)
    }

    pub fn delays(&self) -> Vec<usize> {
        self.delays.iter().map(|&d| d as usize).collect()
    }
}

/// Runs `f` on a pool with `jobs` workers when requested.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    match jobs {
        Some(0) => Err("--jobs must be positive".into()),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| e.to_string()),
        _ => Ok(f()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Verify(args) => verify::run(args),
    };
    ExitCode::from(status)
}
