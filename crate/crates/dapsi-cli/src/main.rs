//! `dapsi`: run the distance-aware PSI protocols, ingest IP lists and
//! benchmark communication.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 protocol
//! abort.

mod bench;
mod config;
mod error;
mod inputs;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dapsi", version, about = "Distance-aware private set intersection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one protocol session.
    Run(Box<run::RunArgs>),
    /// Convert a dotted-quad IPv4 list into a sorted binary integer set.
    IngestIps(IngestArgs),
    /// Measure bytes and wall time over a parameter sweep.
    Bench(bench::BenchArgs),
}

#[derive(Debug, clap::Args)]
struct IngestArgs {
    /// Text file with one address per line.
    input: PathBuf,
    /// Output file (little-endian u32 values).
    #[arg(long)]
    out: PathBuf,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = run::RunConfig::resolve(*args)?;
            let out = run::execute(&cfg)?;
            if cfg.out.is_none() {
                print!("{out}");
            } else if let Some(note) = &out.note {
                eprintln!("{note}");
            }
        }
        Command::IngestIps(args) => {
            let text =
                fs::read_to_string(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
            let ips = inputs::ingest_ips(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", args.input.display())),
                other => other,
            })?;
            inputs::write_file(&args.out, &inputs::encode_ips(&ips))?;
            eprintln!("{} addresses written to {}", ips.len(), args.out.display());
        }
        Command::Bench(args) => {
            let csv = bench::execute(&args)?;
            if args.out.is_none() {
                print!("{csv}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dapsi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
