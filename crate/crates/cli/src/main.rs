//! `abugida`: Bengali text-entry metrics from the command line.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 technique
//! profile problems, 3 replay mismatches in `validate-log`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use abugida::{CostModel, ReportFormat, ScriptTable};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "abugida",
    version,
    about = "Bengali text-entry performance metrics"
)]
struct Cli {
    /// Replacement classification table (defaults to the built-in Bengali one).
    #[arg(long, global = true, env = "ABUGIDA_TABLE", value_name = "PATH")]
    table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute per-technique metrics from a session log.
    Analyze {
        #[command(flatten)]
        input: LogInput,
        #[command(flatten)]
        metrics: MetricFlags,
        #[command(flatten)]
        output: OutputFlags,
        /// Also emit one row per session.
        #[arg(long)]
        per_session: bool,
    },
    /// Print the output stream of a phrase, one basic character per line.
    Decompose {
        phrase: String,
        /// Print grapheme clusters instead.
        #[arg(long)]
        graphemes: bool,
    },
    /// Minimum string distance from phrase A (transcribed) to phrase B (presented).
    Msd {
        a: String,
        b: String,
        /// Technique profile declaring atomic units.
        #[arg(long, value_name = "FILE")]
        profile: Option<PathBuf>,
        #[arg(long, default_value = "paper", value_parser = parse_cost_mode)]
        msd_cost_mode: CostModel,
    },
    /// Word-length statistics of a phrase set.
    CorpusStats { phrases: PathBuf },
    /// Proposed versus grapheme-cluster metrics, per technique.
    CompareNaive {
        #[command(flatten)]
        input: LogInput,
        #[command(flatten)]
        metrics: MetricFlags,
        #[command(flatten)]
        output: OutputFlags,
    },
    /// Replay every session and compare with its recorded transcription.
    ValidateLog {
        #[command(flatten)]
        input: LogInput,
    },
}

#[derive(Debug, Args)]
struct LogInput {
    /// Session log in JSON Lines format.
    log: PathBuf,
    /// Directory of technique profile `.json` files.
    #[arg(long, value_name = "DIR")]
    profiles: PathBuf,
}

#[derive(Debug, Args)]
struct MetricFlags {
    /// Average word length in characters.
    #[arg(long, default_value_t = abugida::DEFAULT_WORD_LENGTH, value_parser = parse_word_length)]
    word_length: f64,
    #[arg(long, default_value = "paper", value_parser = parse_cost_mode)]
    msd_cost_mode: CostModel,
    /// Worker threads for session analysis.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Debug, Args)]
struct OutputFlags {
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn parse_cost_mode(s: &str) -> Result<CostModel, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_word_length(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("word length must be a positive number, got {s}"))
    }
}

/// A failed command: the message for the error stream and the exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn profile(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn install_table(path: &PathBuf) -> Result<(), Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let table = ScriptTable::from_bytes(&bytes)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if ScriptTable::install(table).is_err() {
        log::warn!(
            "classification table already installed; ignoring {}",
            path.display()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(path) = &cli.table {
        install_table(path)?;
    }
    match cli.command {
        Command::Analyze {
            input,
            metrics,
            output,
            per_session,
        } => commands::analyze(&input, &metrics, &output, per_session),
        Command::Decompose { phrase, graphemes } => commands::decompose(&phrase, graphemes),
        Command::Msd {
            a,
            b,
            profile,
            msd_cost_mode,
        } => commands::msd(&a, &b, profile.as_deref(), msd_cost_mode),
        Command::CorpusStats { phrases } => commands::corpus_stats(&phrases),
        Command::CompareNaive {
            input,
            metrics,
            output,
        } => commands::compare_naive(&input, &metrics, &output),
        Command::ValidateLog { input } => commands::validate_log(&input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
