mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "exchange", version, about = "Individually rational priority exchange of bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the mechanism on an instance file.
    Run(RunArgs),
    /// Audit a matching, or the mechanism's output, on an instance file.
    Audit(AuditArgs),
    /// Write a seeded random instance with a trichotomous profile.
    Generate(GenerateArgs),
    /// Time the mechanism over a grid of market sizes and print CSV.
    Bench(BenchArgs),
    /// Verify a built-in reference profile, or list them when no name is given.
    Fixture(FixtureArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Include the round-by-round trace.
    #[arg(long)]
    pub trace: bool,
    /// Comma-separated agent names, highest priority first.
    #[arg(long, value_delimiter = ',')]
    pub priority: Option<Vec<String>>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EfficiencyArg {
    /// Cycle search when it applies, enumeration otherwise.
    Auto,
    Cycle,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Trichotomous,
    StronglyTrichotomous,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON object mapping agent names to object lists.
    #[arg(long, conflicts_with = "mechanism")]
    pub matching: Option<PathBuf>,
    /// Audit the mechanism's output instead of a given matching.
    #[arg(long)]
    pub mechanism: bool,
    /// Priority order for `--mechanism`.
    #[arg(long, value_delimiter = ',', requires = "mechanism")]
    pub priority: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = EfficiencyArg::Auto)]
    pub efficiency: EfficiencyArg,
    /// Bundles with an unacceptable object rank below the endowment.
    #[arg(long)]
    pub strict_acceptability: bool,
    /// Search for profitable misreports against the mechanism.
    #[arg(long)]
    pub sp: bool,
    /// Misreport domain for `--sp`.
    #[arg(long, value_enum, default_value_t = DomainArg::Trichotomous)]
    pub domain: DomainArg,
    /// Search for profitable bearable-set truncations.
    #[arg(long)]
    pub truncation: bool,
    /// Search for obvious manipulations.
    #[arg(long)]
    pub om: bool,
    /// Opponent profiles for `--om`: a sample size, or `exhaustive`.
    #[arg(long, default_value = "200", value_parser = parse_opponents)]
    pub opponents: Opponents,
    /// Seed for sampled opponents.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest object count for enumeration-based audits.
    #[arg(long, default_value_t = exchange_core::optimize::DEFAULT_ENUMERATION_BOUND)]
    pub bound: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opponents {
    Exhaustive,
    Sampled(usize),
}

fn parse_opponents(s: &str) -> Result<Opponents, String> {
    if s == "exhaustive" {
        return Ok(Opponents::Exhaustive);
    }
    match s.parse() {
        Ok(0) | Err(_) => Err(format!("expected a positive count or `exhaustive`, got `{s}`")),
        Ok(n) => Ok(Opponents::Sampled(n)),
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub agents: usize,
    #[arg(long, default_value_t = 2)]
    pub max_endowment: usize,
    /// Total object count; endowment sizes are random when unset.
    #[arg(long)]
    pub objects: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub attractive_probability: f64,
    #[arg(long, default_value_t = 0.3)]
    pub bearable_probability: f64,
    /// Strongly trichotomous preferences.
    #[arg(long)]
    pub strongly: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated `AGENTSxOBJECTS` pairs.
    #[arg(long, value_delimiter = ',', default_value = "5x20,10x40,20x80,50x200")]
    pub sizes: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed runs per size.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.1)]
    pub attractive_probability: f64,
    #[arg(long, default_value_t = 0.3)]
    pub bearable_probability: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    pub name: Option<String>,
    /// Print the fixture's instance file instead of verifying it.
    #[arg(long)]
    pub instance: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("audit failed")]
    AuditFailed,
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::AuditFailed => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<exchange_core::Error> for CliError {
    fn from(e: exchange_core::Error) -> Self {
        match e {
            exchange_core::Error::Invariant(_) => CliError::Invariant(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Audit(args) => commands::audit(&args),
        Command::Generate(args) => commands::generate(&args),
        Command::Bench(args) => commands::bench(&args),
        Command::Fixture(args) => commands::fixture(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::AuditFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
