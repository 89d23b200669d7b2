use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "evikit", version, about = "Expected variational inequalities over polytopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an approximate expected solution.
    Solve(SolveArgs),
    /// Recompute the gaps of a given distribution.
    Verify(VerifyArgs),
    /// VI gap of a single point.
    Gap(GapArgs),
    /// Equilibrium gaps of a distribution in a normal-form game.
    Game(GameArgs),
    /// Scan the marginals reachable by expected solutions of a two-by-two game.
    Region(RegionArgs),
    /// Smoothness, quasar-concavity, welfare and collapse checks.
    Analyze(AnalyzeArgs),
    /// Quick end-to-end checks on the bundled fixtures.
    Selftest(CommonArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Directory for report files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for sampling checks; recorded in every report.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record wall-clock time in the report (makes reports differ run to run).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Eah,
    Pgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiArg {
    Con,
    Lin,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    /// Problem, game or polymatrix JSON (bundled fixture names also work).
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Eah)]
    pub method: MethodArg,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub phi: Option<PhiArg>,
    /// Rounds for gradient dynamics.
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    /// Fixed step size for gradient dynamics.
    #[arg(long)]
    pub step: Option<f64>,
    /// Cap on ellipsoid iterations.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Cut good-enough responses through the center instead of at `-eps`.
    #[arg(long)]
    pub central_cuts: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Distribution JSON `{"support": [..], "weights": [..]}`.
    #[arg(long)]
    pub distribution: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub phi: Option<PhiArg>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GapArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub point: Vec<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Cce,
    Lce,
    Alce,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GameArgs {
    /// Game or polymatrix JSON.
    #[arg(long)]
    pub game: PathBuf,
    /// Distribution over profiles, in first-action coordinates for two-action
    /// games or full mixed-strategy coordinates otherwise.
    #[arg(long)]
    pub distribution: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    pub mode: ModeArg,
    /// Tolerated total gap before the run counts as a verification failure.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegionArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub resolution: f64,
    /// Lattice points per axis of the support grid.
    #[arg(long, default_value_t = 21)]
    pub support_points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_region: f64,
    /// Draw the reference conic over the plot.
    #[arg(long)]
    pub hyperbola: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Problem JSON; smoothness and quasar checks need a `utility`.
    #[arg(long)]
    pub problem: PathBuf,
    /// Distribution to analyze; solved with the ellipsoid method when absent.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Smoothness parameters.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Quasar-concavity parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Claimed maximizer, comma-separated; defaults to the best sample.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x_star: Option<Vec<f64>>,
    /// Grid points per axis for the sample set.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Extra random samples drawn with the seed.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Gap(_) => "gap",
            Command::Game(_) => "game",
            Command::Region(_) => "region",
            Command::Analyze(_) => "analyze",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Gap(a) => &a.common,
            Command::Game(a) => &a.common,
            Command::Region(a) => &a.common,
            Command::Analyze(a) => &a.common,
            Command::Selftest(a) => a,
        }
    }
}
