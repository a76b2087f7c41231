//! `bcsec`: secrecy rate bounds, Fourier-Motzkin derivations and coding
//! simulations for three-receiver broadcast channels.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a resource cap is
//! exceeded.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "bcsec", version, about = "Secrecy rate tools for broadcast channels")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Information measures of every channel in a file.
    Info(InfoArgs),
    /// Degraded, less-noisy and more-capable checks between two channels.
    Ordering(OrderingArgs),
    /// Evaluate or maximize a scalar secrecy-rate bound.
    Bound(BoundArgs),
    /// Rate region rows at the file's distribution.
    Region(RegionArgs),
    /// Fourier-Motzkin elimination, redundancy removal and region comparison.
    Fme(FmeArgs),
    /// Finite-blocklength coding experiments.
    Simulate(SimulateArgs),
    /// The two-component multilevel example end to end.
    ReproExample(ReproArgs),
}

#[derive(Args, Debug)]
pub struct InfoArgs {
    /// Channel file.
    pub file: PathBuf,
    /// Input law from this distribution (uniform inputs otherwise).
    #[arg(long)]
    pub dist: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Root seed; required whenever a search runs.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid resolution per table for exhaustive scans.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Random restarts of the local search.
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
}

#[derive(Args, Debug)]
pub struct OrderingArgs {
    pub file: PathBuf,
    /// Name of the stronger channel.
    #[arg(long, default_value = "y")]
    pub y: String,
    /// Name of the weaker channel.
    #[arg(long, default_value = "z")]
    pub z: String,
    #[arg(long, value_enum, default_value_t = commands::RelationArg::Degraded)]
    pub relation: commands::RelationArg,
    /// Auxiliary cardinality for the less-noisy search.
    #[arg(long, default_value_t = 2)]
    pub aux_card: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    pub file: PathBuf,
    /// wiretap, ck-extension, corollary1, theorem1 or reversely-degraded.
    #[arg(long)]
    pub id: String,
    /// Evaluate at a distribution from the file instead of maximizing.
    #[arg(long)]
    pub evaluate: bool,
    #[arg(long)]
    pub dist: Option<String>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub u3: Option<usize>,
    #[arg(long)]
    pub v: Option<usize>,
    #[arg(long)]
    pub v0: Option<usize>,
    #[arg(long)]
    pub v1: Option<usize>,
    #[arg(long)]
    pub v2: Option<usize>,
    /// Write the maximizing distribution as a channel file.
    #[arg(long)]
    pub argmax_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub kind: commands::RegionKind,
    #[arg(long)]
    pub dist: Option<String>,
    /// Membership test, e.g. `R0=0.1,R1=0.2`.
    #[arg(long)]
    pub point: Option<String>,
}

#[derive(Args, Debug)]
pub struct FmeArgs {
    /// Run a shipped derivation.
    #[arg(long, conflicts_with = "system")]
    pub fixture: Option<String>,
    /// List shipped derivations.
    #[arg(long)]
    pub list: bool,
    /// Inequality system file.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Elimination order (defaults to the file's `eliminate:` line).
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    /// Pair every bound without pruning.
    #[arg(long)]
    pub plain: bool,
    /// Drop rows implied by the others.
    #[arg(long)]
    pub reduce: bool,
    /// Compare the result with this system.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Read every row as non-strict when comparing.
    #[arg(long)]
    pub closure: bool,
    /// Print the multipliers proving each row.
    #[arg(long)]
    pub certificates: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Experiment configuration (TOML).
    pub config: PathBuf,
    /// Channel file with the channels and distribution the config names.
    #[arg(long)]
    pub spec: PathBuf,
    /// The config describes a covering-count experiment.
    #[arg(long)]
    pub lemma1: bool,
}

#[derive(Args, Debug)]
pub struct ReproArgs {
    /// Search seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 256)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Write the example channel as a channel file.
    #[arg(long)]
    pub channel_out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let report = match cli.command {
        Command::Info(a) => commands::info(&a)?,
        Command::Ordering(a) => commands::ordering(&a)?,
        Command::Bound(a) => commands::bound(&a)?,
        Command::Region(a) => commands::region(&a)?,
        Command::Fme(a) => commands::fme(&a)?,
        Command::Simulate(a) => commands::simulate(&a)?,
        Command::ReproExample(a) => commands::repro_example(&a)?,
    };
    let text = report.render(cli.format);
    match cli.output {
        Some(path) => commands::write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
