//! `sudbell`: reproduction experiments for d-outcome Bell tests.
//!
//! Sweeps print CSV (manifest in `#` lines), single runs print JSON with the
//! manifest embedded. Exit codes: 0 success, 1 usage, 2 invariant failure,
//! 3 non-convergence where convergence was required.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sudbell", version, about = "d-outcome Bell inequality experiments with SU(d) measurements")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
struct CommonArgs {
    /// key=value file; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// outcome counts: `3`, `2,3,5` or `2..5`
    #[arg(long, global = true)]
    d: Option<String>,
    /// sd | cg | relax
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// full | reduced
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// relaxation mass
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// relaxation friction
    #[arg(long, global = true)]
    friction: Option<f64>,
    /// relaxation time step
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// worker threads for grids and restarts
    #[arg(long, global = true, env = "SUDBELL_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generator, commutator and adjoint-consistency checks.
    CheckAlgebra {
        /// random parameter vectors per d
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Optimal squeezing r_m and B_d(r_m), B_d(∞) per d.
    Table1 {
        /// coarse r values, comma separated
        #[arg(long)]
        r_grid: Option<String>,
        /// golden-section steps around the best grid point
        #[arg(long)]
        refine_steps: Option<usize>,
    },
    /// SU(2)- and QFT-optimized CHSH for cos φ|00> + sin φ|11>.
    Fig1 {
        /// φ values, comma separated
        #[arg(long)]
        phi_grid: Option<String>,
        /// points per phase axis in the QFT scan
        #[arg(long)]
        qft_grid: Option<usize>,
    },
    /// Optimized B_d for the folded two-mode squeezed vacuum.
    Fig2 {
        /// tanh r values, comma separated; 1 stands for r = ∞
        #[arg(long)]
        tanh_grid: Option<String>,
    },
    /// One multi-start optimization.
    Optimize {
        /// maxent | tmsv:r=R | tmsv:tanh=T | pure2:phi=F
        #[arg(long)]
        state: Option<String>,
        /// exit with code 3 unless the best restart converged
        #[arg(long)]
        require_converged: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
