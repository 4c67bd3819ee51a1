use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use survival_bandit::experiment::{parse_config, run_experiments, RunError, RunOptions};

/// Run survival-bandit experiments and write manifest, table and curve files.
#[derive(Debug, Parser)]
#[command(name = "survival-bandit", version)]
struct Args {
    /// Config file path, or `preset:<name>` (e.g. `preset:paper-appendix-h`).
    #[arg(long)]
    config: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per setting and policy, overriding the config.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    /// Worker threads (falls back to SURVIVAL_BANDIT_THREADS).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Significant digits in CSV output.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=17))]
    precision: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = parse_config(&args.config).map_err(RunError::from).and_then(|config| {
        let opts = RunOptions {
            out: args.out,
            seed: args.seed,
            trials: args.trials,
            threads: args.threads.map(|n| n as usize),
            precision: args.precision.map(|n| n as usize),
        };
        run_experiments(&config, &opts)
    });
    match result {
        Ok(out) => {
            eprintln!("wrote results to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
