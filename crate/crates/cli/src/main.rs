//! `fsl`: generate model problems, certify spectral bounds, solve with PCG,
//! and run the randomized property suite.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fsl_core::model::ProblemKind;
use fsl_core::rng::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "fsl", version, about = "Fictitious space lemma toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a model problem's matrix and decomposition.
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute and cross-check the spectral certificate of the Schwarz preconditioner.
    Certify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Random samples for the two inequality checks.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Solve `A·x = 1` with Schwarz-preconditioned CG.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Relative residual target, in (0, 1).
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Iteration cap (default: twice the dimension plus 10).
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Run the property suite on seeded random triples.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

/// A generated problem (`--kind …` or `--config`) or files (`--matrix` + `--decomposition`).
#[derive(Debug, Clone, Args)]
struct ProblemArgs {
    #[arg(long)]
    kind: Option<ProblemKind>,
    /// Interior points per dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    subdomains: Option<usize>,
    #[arg(long)]
    overlap: Option<usize>,
    /// `key=value` problem file (kind, n, subdomains, overlap).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix Market file holding `A`.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// One line of 0-based indices per subdomain.
    #[arg(long)]
    decomposition: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    /// Seed for every sampling loop (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { problem, out } => commands::gen(&problem, &out),
        Command::Certify { problem, run, samples } => commands::certify(&problem, &run, samples),
        Command::Solve {
            problem,
            run,
            tol,
            max_iter,
        } => commands::solve(&problem, &run, tol, max_iter),
        Command::Verify {
            run,
            instances,
            samples,
        } => commands::verify(&run, instances, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.kind.code())
        }
    }
}
