//! `sharpmax`: command-line harness for the maximal-operator library.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check
//! fails, 2 on usage or input errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "sharpmax",
    version,
    about = "Centered maximal operator: exact evaluation and sharp-constant checks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Weight in (1/2, 1), or `auto` for the optimal weight of p.
    #[arg(long, global = true, default_value = "auto")]
    pub alpha: String,
    /// Tolerance override for the subcommand's main check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Geometric profile grid `n,inner,outer` (distances in support radii).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Seed of the first generated function.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Input function as JSON; the name `tent` selects the built-in tent.
    #[arg(long = "fn", global = true)]
    pub function: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate tau, c_p, alpha0 and r(alpha0) and certify r(alpha0) = c_p^-p.
    Constants {
        /// Points of the alpha sweep.
        #[arg(long, default_value_t = 10_000)]
        alpha_grid: usize,
    },
    /// Maximal profile of one function with its structural checks.
    Maxfn {
        /// Reject input that is not peak-shaped (exit 2).
        #[arg(long)]
        require_peak: bool,
        /// Explicit abscissas instead of the geometric grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
    },
    /// Norm ratio of the truncated-power family with growing caps.
    Sharpness {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e1, 1e2, 1e3, 1e4])]
        caps: Vec<f64>,
        /// Accepted shortfall of the final ratio below c_p.
        #[arg(long, default_value_t = 0.02)]
        band: f64,
        /// Interpolation nodes per side of each member.
        #[arg(long, default_value_t = 256)]
        n_points: usize,
    },
    /// Lower-bound chain of the variational argument.
    Variational {
        /// Number of generated functions, seeds from `--seed` upward.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Weak-type ratio lambda |{Mf > lambda}| / ||f||_1.
    Weaktype {
        /// Levels; defaults to 13 levels over three decades below max f.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Vec<f64>,
        /// Number of generated unimodal functions, seeds from `--seed` upward.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
}

impl From<sharpmax_core::Error> for Failure {
    fn from(e: sharpmax_core::Error) -> Self {
        use sharpmax_core::Error as E;
        match e {
            E::CheckFailed(_) | E::Inconsistent { .. } | E::Domain { .. } => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let c = &cli.common;
    let result = match &cli.command {
        Command::Constants { alpha_grid } => commands::constants(c, *alpha_grid),
        Command::Maxfn { require_peak, points } => commands::maxfn(c, *require_peak, points),
        Command::Sharpness { caps, band, n_points } => commands::sharpness(c, caps, *band, *n_points),
        Command::Variational { count } => commands::variational(c, *count),
        Command::Weaktype { lambdas, count } => commands::weaktype(c, lambdas, *count),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
