use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gapforge::runner::{describe, resolve_threads, run, Command};

/// Mean-field and pairing gap equations: solve, T_c search, phase sweeps,
/// Fock-space oracle and scaling-limit probe.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// TOML run configuration (or a result record to re-run)
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output.path` in the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// solve, tc, sweep, claims, oracle or scaling
    #[arg(long)]
    command: Command,
    /// Worker threads, 0 = one per core; falls back to GAPFORGE_THREADS
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve_threads(cli.threads)
        .map_err(Into::into)
        .and_then(|threads| run(cli.command, &cli.config, cli.out.as_deref(), threads));
    match result {
        Ok(output) => {
            print!("{}", describe(&output));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
