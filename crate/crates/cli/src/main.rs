//! `abf`: build, update and query autoscaling Bloom filter files, tune
//! thresholds, evaluate the rate model and run the reference experiments.
//!
//! Exit status: 0 on success, 1 on domain errors (overflow, underflow,
//! malformed files, I/O), 2 on usage errors.

mod commands;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "abf", version, about = "Autoscaling Bloom filter tool")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an empty counting filter.
    Build {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = abf_core::filter::DEFAULT_COUNTER_MAX)]
        counter_max: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Insert one element per standard-input line. All or nothing.
    Insert {
        #[arg(long)]
        filter: PathBuf,
    },
    /// Remove one element per standard-input line. All or nothing.
    Remove {
        #[arg(long)]
        filter: PathBuf,
    },
    /// Print 1 or 0 for each standard-input line.
    Query {
        #[arg(long)]
        filter: PathBuf,
        #[arg(long, default_value_t = 0)]
        theta: u32,
        /// Decision threshold; defaults to k.
        #[arg(long = "T")]
        t: Option<usize>,
    },
    /// Choose theta and T for a filter file or explicit (m, n, k).
    Tune {
        #[command(flatten)]
        source: TuneSource,
        #[arg(long = "l-tpr")]
        l_tpr: f64,
        /// Keep theta fixed and tune only T.
        #[arg(long)]
        theta: Option<u32>,
    },
    /// Evaluate the rate model at one parameter point.
    Analyze {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        theta: u32,
        #[arg(long = "T")]
        t: u64,
    },
    /// Fixed filter, thresholds 0..=theta_max: model vs simulation.
    SweepTheta {
        #[command(flatten)]
        run: RunArgs,
        /// Also write per-theta dot-product distributions here.
        #[arg(long)]
        pmf_out: Option<PathBuf>,
    },
    /// Growing n, four filters compared.
    CompareGrowth {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
struct TuneSource {
    #[arg(long, conflicts_with_all = ["m", "n", "k"])]
    filter: Option<PathBuf>,
    #[arg(long, requires_all = ["n", "k"])]
    m: Option<u64>,
    #[arg(long, requires_all = ["m", "k"])]
    n: Option<u64>,
    #[arg(long, requires_all = ["m", "n"])]
    k: Option<u64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML file overriding the default experiment parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
