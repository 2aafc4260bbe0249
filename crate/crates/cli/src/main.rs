use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kaclab::{run, RunError, RunOptions};

/// Run one experiment described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "kaclab", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// RNG seed; overrides `params.seed` in the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
    /// error, warn, info, debug or trace.
    #[arg(long, default_value = "warn")]
    log_level: log::LevelFilter,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    let opts = RunOptions { config: cli.config, out: cli.out, seed: cli.seed, threads: cli.threads };
    match run(&opts) {
        Ok(outcome) => {
            for line in &outcome.summary.lines {
                println!("{line}");
            }
            println!("artifacts: {}", outcome.out_dir.display());
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e @ RunError::Schema(_)) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
