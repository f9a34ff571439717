//! Drives the runner from a TOML config, the same path the binary takes.
//!
//!     cargo run --example run_from_config -- configs/tc_attractive.toml tc

use std::path::PathBuf;

use gapforge::runner::{describe, run, Command};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/solve_flat_band.toml".into()));
    let command: Command = args.next().as_deref().unwrap_or("solve").parse().unwrap();
    let out = std::env::temp_dir().join(format!("gapforge-example-{}.toml", command.name()));
    match run(command, &config, Some(&out), 0) {
        Ok(files) => {
            print!("{}", describe(&files));
            print!("{}", std::fs::read_to_string(&out).unwrap_or_default());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
