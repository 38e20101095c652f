//! `dmspace`: load finite distance measure spaces, compare them, and run the
//! experiment suites.

mod commands;
mod document;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Document { path: String, msg: String },
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dmspace", version, about = "Finite distance measure spaces and d_rho bounds")]
pub struct Cli {
    /// Read and compute in floating point instead of exact rationals.
    #[arg(long, global = true)]
    pub float: bool,
    /// Comparison tolerance (default 0 for rationals, 1e-9 for floats).
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetName {
    Quick,
    Default,
    Thorough,
    /// Local search from the cell matching only (pants comparisons).
    Degeneration,
}

/// CSV destination and seed shared by the experiment suites.
#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = dmspace::DEFAULT_SEED)]
    pub seed: u64,
    /// CSV output; relative paths resolve against $DMSPACE_OUT_DIR when it is set.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every invariant of a space document.
    Validate { file: PathBuf },
    /// Finite-distance classes.
    Components { file: PathBuf },
    /// Levy-Prokhorov distance between two measures on one space.
    Prokhorov {
        file: PathBuf,
        /// Comma-separated masses; defaults to the document's measure.
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        nu: String,
        /// Also run the bisection oracle (floating point).
        #[arg(long)]
        oracle: bool,
    },
    /// Glue Y onto X along `x=y` label pairs with slack delta.
    Glue {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value = "")]
        pairs: String,
        #[arg(long, default_value = "0")]
        delta: String,
        /// Write the quotient space (zero-distance points merged) here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Bounds on d_rho with a re-validated witness.
    Rho {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = dmspace::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = BudgetName::Default)]
        budget: BudgetName,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Decide whether two spaces are at d_rho distance zero.
    Equiv { x: PathBuf, y: PathBuf },
    /// Greedy epsilon-net and its approximation measure.
    Approx {
        file: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Finite net certificates for a family of spaces.
    Certify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        eps: String,
        /// Mass cap A.
        #[arg(long)]
        cap: String,
        /// Ball lower bound B(r) = min(ball, slope * r).
        #[arg(long)]
        ball: String,
        #[arg(long)]
        ball_slope: Option<String>,
        /// Extra radii at which the ball bound is checked.
        #[arg(long, default_value = "")]
        radii: String,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Right-angled hexagon from alternate sides b1,b2,b3.
    Hexagon {
        #[arg(long)]
        b: String,
        /// Compare with a second hexagon sharing b1 and b3.
        #[arg(long)]
        compare: Option<String>,
    },
    /// Sampled pair of pants with boundary lengths l1,l2,l3 (0 = cusp).
    Pants {
        #[arg(long)]
        lengths: String,
        #[arg(long, default_value_t = dmspace::hyperbolic::DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Pants bounds as one boundary length shrinks to a cusp.
    Degenerate {
        #[arg(long, default_value = "1")]
        b1: f64,
        #[arg(long, default_value = "1")]
        b3: f64,
        #[arg(long, default_value = "1,0.5,0.1,0.01")]
        b2: String,
        #[arg(long, default_value_t = dmspace::hyperbolic::DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long, value_enum, default_value_t = BudgetName::Degeneration)]
        budget: BudgetName,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Level bounds and ball masses for a tower of covers.
    Solenoid {
        #[arg(long)]
        degrees: String,
        #[arg(long, default_value = "3/10,1/10,1/20")]
        eps: String,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Sheets collapsing onto an interval.
    Collapse {
        #[arg(long, default_value_t = 1.0)]
        c_m: f64,
        #[arg(long, default_value = "2,4,8,16")]
        sheets: String,
        #[arg(long, default_value_t = 1.0)]
        half_length: f64,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        suite: SuiteArgs,
    },
    /// Entrywise limit of a sequence of spaces on common labels.
    Limit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value = "3")]
        tail: usize,
        #[arg(long, default_value = "1000")]
        threshold: String,
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
