//! `hoc`: discover multivariate correlation rules by comparing rule
//! TRUE-probabilities on a dataset against a marginal-preserving
//! scrambled version of it.

mod commands;
mod manifest;
mod plant;

use clap::{Args, Parser, Subcommand};
use std::process::ExitCode;

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 resource cap.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(hoc_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<hoc_core::Error> for CliError {
    fn from(e: hoc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(hoc_core::Error::Io(e))
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e {
                hoc_core::Error::InvalidPlant(_) | hoc_core::Error::InvalidConfig(_) => 1,
                hoc_core::Error::ExactCapExceeded { .. } => 3,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "hoc",
    version,
    about = "Hyper-occurrence rule discovery over tabular datasets"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = all cores).
    /// The thread count never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset with planted quorum rules.
    Generate(GenerateArgs),
    /// Build a scrambled (independence-null) dataset.
    Scramble(ScrambleArgs),
    /// Score a network: qr, qs and hoc per rule.
    Eval(EvalArgs),
    /// Evolve a rule network that maximises coverage.
    Search(SearchArgs),
    /// Pairwise Pearson and mutual-information matrices.
    Baseline(BaselineArgs),
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Rows to generate (exhaustive mode derives this, 2^background).
    #[arg(long)]
    rows: Option<usize>,
    /// Number of background variables.
    #[arg(long)]
    background: usize,
    /// Planted rule "VARS:Q<q>->TARGET[@NOISE]" where VARS is a comma
    /// list of indices or ranges, e.g. "0-5:Q6->6" or "0,2,9:Q2->10@0.05".
    /// Repeat for several plants.
    #[arg(long = "plant", required = true)]
    plants: Vec<String>,
    /// Enumerate every background pattern exactly once.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; a sidecar manifest is written next to it.
    #[arg(long, short = 'o', default_value = "planted.csv")]
    out: std::path::PathBuf,
}

#[derive(Args)]
pub struct ScrambleArgs {
    #[arg(long, short = 'i')]
    input: std::path::PathBuf,
    /// Binarize input values at 0.5 while loading.
    #[arg(long)]
    binarize: bool,
    /// Enumerate all value combinations (weighted rows).
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Draw a seeded Monte-Carlo sample instead.
    #[arg(long)]
    mc: bool,
    /// Monte-Carlo sample size.
    #[arg(long, default_value_t = hoc_core::DEFAULT_MC_SAMPLE_SIZE)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse exact enumeration above this many combinations.
    #[arg(long, default_value_t = hoc_core::DEFAULT_EXACT_CAP)]
    cap: u64,
    /// Skip the weight column in exact mode.
    #[arg(long)]
    no_weights: bool,
    #[arg(long, short = 'o', default_value = "sds.csv")]
    out: std::path::PathBuf,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long, short = 'i')]
    input: std::path::PathBuf,
    /// Network JSON document to score.
    #[arg(long)]
    network: std::path::PathBuf,
    #[arg(long)]
    binarize: bool,
    /// Score qs against the exact scrambled dataset (default).
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Score qs against a Monte-Carlo scrambled sample.
    #[arg(long)]
    mc: bool,
    #[arg(long, default_value_t = hoc_core::DEFAULT_MC_SAMPLE_SIZE)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = hoc_core::DEFAULT_EXACT_CAP)]
    cap: u64,
    /// Keep only the top K rules per layer, highest hoc first.
    #[arg(long)]
    top: Option<usize>,
    /// Report format: tsv or json.
    #[arg(long, default_value = "tsv")]
    format: String,
    /// Output path (stdout when omitted).
    #[arg(long, short = 'o')]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct SearchArgs {
    #[arg(long, short = 'i')]
    input: std::path::PathBuf,
    #[arg(long)]
    binarize: bool,
    /// TOML config mirroring the search configuration fields;
    /// command-line flags override it.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Resume from a checkpoint (uses the checkpoint's config).
    #[arg(long)]
    resume: Option<std::path::PathBuf>,
    #[arg(long)]
    algo: Option<hoc_core::Algo>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    tournament: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    mutation_sigma: Option<f64>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    freeze_interval: Option<usize>,
    #[arg(long)]
    events_per_epoch: Option<usize>,
    #[arg(long)]
    grid_side: Option<usize>,
    /// Comma-separated layer sizes, e.g. "32,32".
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    layerwise: bool,
    #[arg(long)]
    top_h: Option<usize>,
    #[arg(long)]
    sds_size: Option<usize>,
    #[arg(long)]
    sds_exact: bool,
    #[arg(long)]
    report_size: Option<usize>,
    #[arg(long)]
    min_qr: Option<f64>,
    #[arg(long)]
    max_qs: Option<f64>,
    #[arg(long)]
    min_hoc: Option<f64>,
    /// Write a checkpoint every N generations (0: only at the end).
    #[arg(long, default_value_t = 0)]
    checkpoint_every: usize,
    #[arg(long, default_value = "run")]
    out_dir: std::path::PathBuf,
}

#[derive(Args)]
pub struct BaselineArgs {
    #[arg(long, short = 'i')]
    input: std::path::PathBuf,
    #[arg(long)]
    binarize: bool,
    #[arg(long, default_value = "baseline")]
    out_dir: std::path::PathBuf,
}

fn install_workers(workers: usize) {
    #[cfg(feature = "parallel")]
    if workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("warning: could not set worker count: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if workers > 1 {
        eprintln!("warning: built without the parallel feature; running sequentially");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success exit
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    install_workers(cli.workers);
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Scramble(args) => commands::scramble(args),
        Command::Eval(args) => commands::eval(args),
        Command::Search(args) => commands::search(args),
        Command::Baseline(args) => commands::baseline(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
