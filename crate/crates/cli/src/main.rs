//! `adsqf`: limit sets and rigidity diagnostics for AdS quasi-Fuchsian groups.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit code for a runtime failure (bad input file, numerical failure, I/O).
pub const EXIT_RUNTIME: u8 = 3;
/// Exit code for a malformed command line or an unknown generator label.
pub const EXIT_USAGE: u8 = 4;
/// Exit code when a harvest produced no points; the CSV still has its header.
pub const EXIT_EMPTY: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "adsqf", version, about = "Limit sets and rigidity diagnostics for AdS quasi-Fuchsian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    run: RunFlags,
}

#[derive(Debug, Clone, Args)]
pub struct RunFlags {
    /// Maximal word length L.
    #[arg(long = "words", value_name = "L", default_value_t = 6, global = true,
          value_parser = clap::value_parser!(u8).range(1..=14))]
    pub words: u8,

    /// Proximality gap: words with lambda1 - lambda2 at most EPS are skipped.
    #[arg(long = "gap", value_name = "EPS", default_value_t = adsqf::tol::EPS_GAP, global = true)]
    pub gap: f64,

    /// Worker threads; defaults to one per core.
    #[arg(long, value_name = "N", global = true)]
    pub threads: Option<usize>,

    /// Seed for randomized trials.
    #[arg(long, value_name = "S", default_value_t = 0, global = true)]
    pub seed: u64,

    /// Directory for output artifacts; created if missing.
    #[arg(long, value_name = "DIR", global = true)]
    pub out: Option<PathBuf>,

    /// Also write an SVG scatter of the limit set.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral report for a single word.
    Classify {
        presentation: PathBuf,
        /// Word in the "a b A B" alphabet; uppercase is the inverse.
        word: String,
    },
    /// Harvest attracting fixed points into a CSV point cloud.
    Limitset { presentation: PathBuf },
    /// Jordan projections of all proximal words and their cone spread.
    Jordan { presentation: PathBuf },
    /// Fuchsian versus Zariski-dense diagnostic; the exit code is the verdict.
    Verdict { presentation: PathBuf },
    /// Slope and second-difference statistics of the limit-set graph.
    Regularity {
        presentation: PathBuf,
        /// Step sizes for second differences.
        #[arg(long, value_delimiter = ',', default_values_t = commands::DEFAULT_SCALES)]
        scales: Vec<f64>,
    },
    /// Where lightlike curves over great circles meet the limit set.
    Geodesic {
        presentation: PathBuf,
        /// Base point on the sphere, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "direction")]
        point: Option<Vec<f64>>,
        /// Tangent direction at the base point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "point")]
        direction: Option<Vec<f64>>,
        /// Number of seeded random geodesics when no point is given.
        #[arg(long, default_value_t = 8, conflicts_with = "point")]
        count: usize,
    },
    /// Check a presentation file: isometries and relators.
    Validate { presentation: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] adsqf::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(adsqf::Error::UnknownLabel(_)) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

fn dispatch(command: &Command, run: &RunFlags) -> Result<u8, CliError> {
    if run.svg && run.out.is_none() {
        return Err(CliError::Usage("--svg needs --out".into()));
    }
    match command {
        Command::Classify { presentation, word } => commands::classify(presentation, word, run),
        Command::Limitset { presentation } => commands::limitset(presentation, run),
        Command::Jordan { presentation } => commands::jordan(presentation, run),
        Command::Verdict { presentation } => commands::verdict(presentation, run),
        Command::Regularity { presentation, scales } => commands::regularity(presentation, scales, run),
        Command::Geodesic { presentation, point, direction, count } => {
            let explicit = point.clone().zip(direction.clone());
            commands::geodesic(presentation, explicit, *count, run)
        }
        Command::Validate { presentation } => commands::validate(presentation, run),
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(command: &Command, run: &RunFlags) -> Result<u8, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = run.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| dispatch(command, run))
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(command: &Command, run: &RunFlags) -> Result<u8, CliError> {
    dispatch(command, run)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run_with_threads(&cli.command, &cli.run) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
