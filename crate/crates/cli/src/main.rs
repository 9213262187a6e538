//! `genfpp`: evaluate, simulate, estimate, validate and reproduce the Monte
//! Carlo tables for generalized fractional Poisson renewal processes.

mod commands;
mod figure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser)]
#[command(name = "genfpp", version, about = "Generalized fractional Poisson renewal processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate densities, CDFs, state probabilities, mean counts, Laplace transforms or moments on a grid.
    Eval(EvalArgs),
    /// Simulate event times of renewal paths.
    Simulate(SimulateArgs),
    /// Estimate parameters from waiting times by the method of log-moments.
    Estimate(EstimateArgs),
    /// Run the numerical self-checks.
    Validate(ValidateArgs),
    /// Run a Monte Carlo bias/RMSE study from a config file.
    Study(StudyArgs),
    /// Write the density grids for the Figure 1 and Figure 2 panels.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Gen1,
    Gen2,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long)]
    pub nu: f64,
    /// Gamma shape of Generalization I (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Stretching exponent of Generalization II (required for gen2).
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct SeedArgs {
    /// Random seed; GENFPP_SEED supplies a default.
    #[arg(long, env = "GENFPP_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalKind {
    Pdf,
    Cdf,
    Pmf,
    Mean,
    Lt,
    Moment,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub kind: EvalKind,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Times (pdf, cdf, pmf, mean), comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Laplace variables (lt).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub s: Vec<f64>,
    /// Moment orders (moment).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q: Vec<f64>,
    /// Largest state for pmf; chosen from the tail mass when omitted.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Simulated paths for gen2 pmf and mean, which have no closed form.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Keep events in (0, horizon].
    #[arg(long, conflicts_with = "events", required_unless_present = "events")]
    pub horizon: Option<f64>,
    /// Simulate exactly this many events per path.
    #[arg(long)]
    pub events: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    SignRule,
    Positive,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// CSV of waiting times: a `waiting_time` column, simulated paths
    /// (path_id, event_time), or a single unnamed column. Standard input
    /// when omitted or '-'.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sign choice for gamma in gen2.
    #[arg(long, value_enum, default_value_t = SignArg::SignRule)]
    pub gamma_sign: SignArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Specfun,
    Dist,
    Process,
    All,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args)]
pub struct StudyArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory receiving <config stem>.csv and <config stem>.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    All,
}

#[derive(Args)]
pub struct FigureArgs {
    #[arg(long, value_enum, default_value_t = FigureArg::All)]
    pub figure: FigureArg,
    /// Grid points on (0, xmax].
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, default_value_t = 5.0)]
    pub xmax: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, input or parameters: exit 2.
    Validation(String),
    /// Series, quadrature or root-finding failure, or an unattainable estimate: exit 3.
    Numerical(String),
}

impl From<genfpp::Error> for CliError {
    fn from(e: genfpp::Error) -> Self {
        match e {
            genfpp::Error::Domain(_) | genfpp::Error::Parse(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv error: {e}"))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => commands::eval(&argv, a),
        Command::Simulate(a) => commands::simulate(&argv, a),
        Command::Estimate(a) => commands::estimate(&argv, a),
        Command::Validate(a) => commands::validate(&argv, a),
        Command::Study(a) => commands::study(&argv, a),
        Command::Figure(a) => figure::run(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
