use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ringlat::{load_scenario, run_scenario, Format, RunOptions};

/// Run a rotating-ring-lattice scenario and write its tables.
#[derive(Debug, Parser)]
#[command(name = "ringlat", version)]
struct Cli {
    /// Scenario file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output format; overrides the scenario's `format`
    #[arg(long)]
    format: Option<Format>,
    /// Worker threads for sweeps
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = match load_scenario(&cli.config) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions {
        out_dir: cli.out,
        format: cli.format,
        threads: cli.threads,
        base_dir: cli.config.parent().map(PathBuf::from).unwrap_or_default(),
    };
    match run_scenario(&scenario, &opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &ringlat::RunError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
