//! `jointsparse`: joint sparse recovery experiments from the command line.
//!
//! Every command prints a run report (JSON) or its table (CSV or aligned
//! text). Exit codes:
//! 0 on success, 1 when a computation fails, 2 on bad input or usage.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "jointsparse", version, about = "Joint sparse recovery by l2,0 and l2,p minimisation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rows with Euclidean norm at or below this count as zero.
    #[arg(long, global = true, default_value_t = jointsparse::norms::DEFAULT_ZERO_TOL)]
    pub tol: f64,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit the JSON run report (default).
    #[arg(long, global = true, conflicts_with_all = ["csv", "text"])]
    pub json: bool,
    /// Emit the command's CSV table instead of the report.
    #[arg(long, global = true, conflicts_with = "text")]
    pub csv: bool,
    /// Emit the command's table with aligned columns.
    #[arg(long, global = true)]
    pub text: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold p* of a problem.
    Pstar {
        problem: PathBuf,
    },
    /// Solve one problem with one method.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum)]
        method: SolveMethod,
        /// Exponent for irls and nullspace.
        #[arg(long)]
        p: Option<f64>,
        /// Largest support tried by l20; defaults to the problem's k, else n.
        #[arg(long)]
        k_max: Option<usize>,
        /// Random starts of the null space descent.
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Compare the l2,p and l2,0 minimisers over a grid of p.
    Sweep {
        problem: PathBuf,
        /// `a:b:step` or a comma-separated list, each value in (0, 1].
        #[arg(long, default_value = "0.1:1:0.1")]
        grid: String,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Frobenius distance at which two minimisers count as equal.
        #[arg(long, default_value_t = 1e-4)]
        match_tol: f64,
    },
    /// Null space constant curve with the spectral upper bound alongside.
    Nsc {
        /// Problem JSON, matrix JSON or headerless matrix CSV.
        input: PathBuf,
        /// Support size; defaults to the problem's k.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// `a:b:step` or a comma-separated list, each value in [0, 1].
        #[arg(long, default_value = "0:1:0.1")]
        grid: String,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Recompute a bundled example and check it against the recorded values.
    Reproduce {
        #[arg(value_enum)]
        example: Example,
    },
    /// Generate a problem with a planted row-sparse solution.
    Gen(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    L20,
    Irls,
    Nullspace,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Example1,
    Example2,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Full GenSpec as inline JSON or a path; replaces the other flags.
    #[arg(long, conflicts_with_all = ["kind", "m", "n", "r", "k", "nodes", "amplitude"])]
    pub spec: Option<String>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kind: Kind,
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Comma-separated Vandermonde nodes.
    #[arg(long, allow_hyphen_values = true)]
    pub nodes: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Gaussian,
    Vandermonde,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.global;
    let format = match (g.csv, g.text) {
        (true, _) => Format::Csv,
        (_, true) => Format::Text,
        _ => Format::Json,
    };
    let result = match cli.command {
        Command::Pstar { problem } => commands::pstar(&g, &problem),
        Command::Solve {
            problem,
            method,
            p,
            k_max,
            restarts,
        } => commands::solve(&g, &problem, method, p, k_max, restarts),
        Command::Sweep {
            problem,
            grid,
            k_max,
            restarts,
            match_tol,
        } => commands::sweep(&g, &problem, &grid, k_max, restarts, match_tol),
        Command::Nsc {
            input,
            k,
            r,
            grid,
            restarts,
        } => commands::nsc(&g, &input, k, r, &grid, restarts),
        Command::Reproduce { example } => commands::reproduce(&g, example),
        Command::Gen(args) => commands::gen(&g, &args),
    };
    match result.and_then(|run| run.emit(format, g.out.as_deref())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
