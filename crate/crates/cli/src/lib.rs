//! Command-line front end for `multischmidt`.
//!
//! Exit codes: 0 decomposable or check passed, 1 absent or check failed,
//! 2 input error, 3 numerical ambiguity.

pub mod commands;
pub mod report;
pub mod state_file;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use multischmidt::{CheckMode, DEFAULT_TOL};
use thiserror::Error;

pub use report::{Outcome, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {}: {source}", path.display())]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] multischmidt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(multischmidt::Error::NumericalAmbiguity(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "multischmidt", version, about = "Multipartite Schmidt decompositions of pure states")]
pub struct Cli {
    /// Relative zero threshold for coefficients and residual weights.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Print a single JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a state has a multipartite Schmidt decomposition.
    Decompose { path: PathBuf },
    /// Schmidt number across a bipartition such as `0|1,2`.
    Rank {
        path: PathBuf,
        #[arg(long)]
        split: String,
    },
    /// Evaluate the basis condition on per-party bases.
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
        /// `computational` or a JSON basis file.
        #[arg(long, default_value = "computational")]
        basis: String,
    },
    /// Replay the counterexamples to the single-party condition.
    PaperExamples,
    /// Write a random state with a known decomposition plus a `.truth.json` sidecar.
    Random {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    Pati,
}

impl From<ModeArg> for CheckMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::All => CheckMode::AllParties,
            ModeArg::Pati => CheckMode::SmallestPartyOnly,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    if !cli.tol.is_finite() || cli.tol < 0.0 {
        return Err(CliError::Input(format!("tolerance must be finite and nonnegative, got {}", cli.tol)));
    }
    let tol = cli.tol;
    match &cli.command {
        Command::Decompose { path } => commands::cmd_decompose(path, tol),
        Command::Rank { path, split } => commands::cmd_rank(path, split, tol),
        Command::Check { path, mode, basis } => commands::cmd_check(path, (*mode).into(), basis, tol),
        Command::PaperExamples => commands::cmd_paper_examples(tol),
        Command::Random { dims, lambdas, seed, out } => commands::cmd_random(dims, lambdas, *seed, out),
    }
}

/// Runs one command, writes its output and returns the exit code.
pub fn run(cli: &Cli, out: &mut impl Write, err: &mut impl Write) -> i32 {
    match execute(cli) {
        Ok(outcome) => match outcome.emit(cli.json, out, err) {
            Ok(()) => outcome.code,
            Err(_) => 2,
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
