//! `kfr` — generate, solve, simulate, and verify facility-reallocation
//! instances from the command line.
//!
//! Exit codes: `0` success (and all requested checks passed), `1` an
//! operational failure (bad input, missing file, oversized oracle workload),
//! `2` a claim check that was supposed to hold did not.

mod commands;
mod io;
mod report;
mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kfr_core::analysis::MedianRep;
use kfr_core::generate::GenModel;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kfr",
    version,
    about = "Exact solving, online simulation, and claim checking for facility reallocation on a line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reproducible instance from a seed
    Gen(GenArgs),
    /// Solve an instance to optimality and emit the schedule
    Solve(SolveArgs),
    /// Run the two-facility online algorithm over an instance
    Online(OnlineArgs),
    /// Check optimality and competitiveness claims on instances
    Verify(VerifyArgs),
    /// Solve with every applicable method and compare the results
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Uniform,
    RandomWalk,
    Clustered,
    AlternatingAdversary,
}

impl From<ModelArg> for GenModel {
    fn from(value: ModelArg) -> Self {
        match value {
            ModelArg::Uniform => GenModel::Uniform,
            ModelArg::RandomWalk => GenModel::RandomWalk,
            ModelArg::Clustered => GenModel::Clustered,
            ModelArg::AlternatingAdversary => GenModel::AlternatingAdversary,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Solve the relaxation exactly and round losslessly
    Lp,
    /// Dynamic program over coordinate nodes
    Dp,
    /// Exhaustive enumeration over coordinate nodes
    Enum,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RoundingArg {
    /// Place facility m where the fractional mass prefix passes m-1
    Prefix,
    /// Place facility m at the leftmost node it fractionally occupies
    Leftmost,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MedianRepArg {
    Lower,
    Upper,
}

impl From<MedianRepArg> for MedianRep {
    fn from(value: MedianRepArg) -> Self {
        match value {
            MedianRepArg::Lower => MedianRep::Lower,
            MedianRepArg::Upper => MedianRep::Upper,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
enum CheckArg {
    /// Relaxation value, rounded schedule, and dynamic program all agree
    Theorem1,
    /// Both rounding rules cost the same and stay ordered
    RoundingEquiv,
    /// The reference solution costs at most three times the optimum
    LemmaY,
    /// Every per-stage potential inequality holds and telescopes
    PerStage,
    /// The online run is within the competitive bound
    Competitive,
}

impl CheckArg {
    fn name(self) -> &'static str {
        match self {
            CheckArg::Theorem1 => "theorem1",
            CheckArg::RoundingEquiv => "rounding-equiv",
            CheckArg::LemmaY => "lemma-y",
            CheckArg::PerStage => "per-stage",
            CheckArg::Competitive => "competitive",
        }
    }
}

/// Shared shape flags for seeded generation.
#[derive(Args)]
struct ShapeArgs {
    /// Agent arrival model
    #[arg(long, value_enum, default_value_t = ModelArg::Uniform)]
    model: ModelArg,
    /// Agents per stage
    #[arg(long, default_value_t = 3)]
    agents: usize,
    /// Number of stages
    #[arg(long, default_value_t = 2)]
    stages: usize,
    /// Number of facilities
    #[arg(long, default_value_t = 2)]
    facilities: usize,
    /// Inclusive coordinate range, written LO:HI
    #[arg(long, default_value = "0:20", value_parser = parse_range)]
    range: (i64, i64),
    /// Largest per-stage step for walking models
    #[arg(long, default_value_t = 2)]
    spread: i64,
    /// Coordinates are multiples of 1/DENOMINATOR
    #[arg(long, default_value_t = 1)]
    denominator: u64,
}

fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {text:?}"))?;
    let lo = lo.trim().parse().map_err(|e| format!("bad low bound: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad high bound: {e}"))?;
    Ok((lo, hi))
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Generator seed
    #[arg(long, required_unless_present = "genspec", conflicts_with = "genspec")]
    seed: Option<u64>,
    /// Read the whole generator spec from a JSON file instead of flags
    #[arg(long)]
    genspec: Option<PathBuf>,
    /// Write the instance here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file ("-" reads stdin)
    #[arg(long)]
    input: PathBuf,
    /// Solution method
    #[arg(long, value_enum, default_value_t = MethodArg::Lp)]
    method: MethodArg,
    /// Rounding rule (only with --method lp)
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,
    /// Write the schedule here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the rounding trace JSON here (only with --method lp)
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the relaxation in LP text format here (only with --method lp)
    #[arg(long)]
    lp_dump: Option<PathBuf>,
    /// Write a run report JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it non-reproducible)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct OnlineArgs {
    /// Instance JSON file ("-" reads stdin)
    #[arg(long)]
    input: PathBuf,
    /// Write the schedule here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write per-stage traces here, one JSON object per line
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a per-stage CSV summary here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write a run report JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it non-reproducible)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON file; omit to verify a seeded suite instead
    #[arg(long, conflicts_with_all = ["seed", "genspec"])]
    input: Option<PathBuf>,
    /// Seed N or inclusive seed range A..B for a generated suite
    #[arg(long)]
    seed: Option<String>,
    /// Read the generator spec from a JSON file (seed flags still apply)
    #[arg(long)]
    genspec: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Checks to run (default: all that apply to the instance)
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Vec<CheckArg>,
    /// Median endpoint used for the reference solution
    #[arg(long, value_enum, default_value_t = MedianRepArg::Lower)]
    median_rep: MedianRepArg,
    /// Write the full verification report JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it non-reproducible)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance JSON file ("-" reads stdin)
    #[arg(long)]
    input: PathBuf,
    /// Write the comparison report JSON here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Record wall-clock time in the report (makes it non-reproducible)
    #[arg(long)]
    timings: bool,
}

/// What a successfully executed command concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Clean,
    ClaimFailed,
}

fn main() -> ExitCode {
    // Usage problems are operational errors (exit 1); clap's default exit
    // code of 2 is reserved here for failed claim checks.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Solve(args) => commands::solve(args),
        Command::Online(args) => commands::online(args),
        Command::Verify(args) => verify::verify(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::ClaimFailed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
