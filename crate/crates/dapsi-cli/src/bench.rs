//! The `bench` subcommand: communication and wall time over a parameter sweep.
//!
//! Output is CSV with columns `variant,param,bytes,wall_ms`. The integer sweep
//! varies `d` and emits a `dyadic` and a `naive` row per value. The Hamming
//! sweep varies `l` at fixed `d` and emits `recon`, `restricted` and `total`
//! rows per value; all three rows of one run share its wall time.
//!
//! Byte counts of the integer sweep are only meaningful with the `dh`
//! backend: the `oracle` backend ships Bob's set in the clear and nothing of
//! Alice's.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use dapsi::bits::BitVector;
use dapsi::hamming::{self, flip_random, HamParams};
use dapsi::intpsi::{self, Augmentation, IntParams};
use dapsi::psi_backend::Backend;
use dapsi::session::party_rng;
use rand::Rng;

use crate::error::CliError;
use crate::inputs::write_file;
use crate::run::BackendArg;

/// Which sweep to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchProtocol {
    /// Integer PSI over a range of thresholds `d`.
    Intpsi,
    /// Binned Hamming PSI over a range of vector lengths.
    Hampsi,
}

/// Flags of the `bench` subcommand.
#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Sweep to run.
    #[arg(long)]
    pub protocol: BenchProtocol,
    /// Comma-separated values of the swept parameter (`d` or `l`); may be empty.
    #[arg(long, default_value = "")]
    pub sweep: String,
    /// Set size of each party.
    #[arg(long)]
    pub n: Option<usize>,
    /// Hamming threshold for the vector-length sweep.
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Target false-positive rate for the vector-length sweep.
    #[arg(long, default_value_t = 0.1)]
    pub fpr: f64,
    /// Integer bit length.
    #[arg(long = "L", default_value_t = 32)]
    pub bit_len: u32,
    /// PSI engine for the integer sweep.
    #[arg(long, value_enum, default_value = "dh")]
    pub backend: BackendArg,
    /// Seed for inputs and protocol randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// CSV header.
pub const HEADER: &str = "variant,param,bytes,wall_ms\n";

fn parse_sweep(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| CliError::Config(format!("sweep value `{v}` is not an integer"))))
        .collect()
}

fn row(out: &mut String, variant: &str, param: u64, bytes: u64, wall_ms: f64) {
    let _ = writeln!(out, "{variant},{param},{bytes},{wall_ms:.1}");
}

fn int_sweep(args: &BenchArgs, values: &[u64], out: &mut String) -> Result<(), CliError> {
    let n = args.n.unwrap_or(1000);
    let backend = Backend::from(args.backend);
    let span = 1u64 << args.bit_len.min(24);
    for &d in values {
        let params = IntParams::new(d, args.bit_len)?;
        let mut rng = party_rng(args.seed ^ d, "bench-inputs");
        let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..span)).collect();
        let b: Vec<u64> = (0..n).map(|_| rng.gen_range(0..span)).collect();
        for (name, aug) in [("dyadic", Augmentation::Dyadic), ("naive", Augmentation::Naive)] {
            let start = Instant::now();
            let run = intpsi::int_psi(&a, &b, &params, backend, aug, args.seed)?;
            row(out, name, d, run.transcript.total_bytes(), start.elapsed().as_secs_f64() * 1e3);
        }
    }
    Ok(())
}

fn ham_sweep(args: &BenchArgs, values: &[u64], out: &mut String) -> Result<(), CliError> {
    let n = args.n.unwrap_or(4);
    for &ell in values {
        let ell = ell as usize;
        let params = HamParams::new(ell, args.d, args.fpr)?;
        let mut rng = party_rng(args.seed ^ ell as u64, "bench-inputs");
        let a: Vec<BitVector> = (0..n).map(|_| BitVector::random(ell, &mut rng)).collect();
        let b: Vec<BitVector> = a
            .iter()
            .enumerate()
            .map(|(i, v)| if i % 2 == 0 { flip_random(v, args.d, &mut rng) } else { BitVector::random(ell, &mut rng) })
            .collect();
        let start = Instant::now();
        let run = hamming::ham_psi(&a, &b, &params, args.seed)?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        let t = &run.transcript;
        row(out, "recon", ell as u64, t.phase_bytes("recon"), wall);
        row(out, "restricted", ell as u64, t.phase_bytes("restricted"), wall);
        row(out, "total", ell as u64, t.total_bytes(), wall);
    }
    Ok(())
}

/// Runs the sweep and returns the CSV text; writes it to `--out` when given.
pub fn execute(args: &BenchArgs) -> Result<String, CliError> {
    let values = parse_sweep(&args.sweep)?;
    let mut out = String::from(HEADER);
    match args.protocol {
        BenchProtocol::Intpsi => int_sweep(args, &values, &mut out)?,
        BenchProtocol::Hampsi => ham_sweep(args, &values, &mut out)?,
    }
    if let Some(p) = &args.out {
        write_file(p, out.as_bytes())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(protocol: BenchProtocol, sweep: &str) -> BenchArgs {
        BenchArgs {
            protocol,
            sweep: sweep.into(),
            n: Some(3),
            d: 2,
            fpr: 0.2,
            bit_len: 16,
            backend: BackendArg::Oracle,
            seed: 1,
            out: None,
        }
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("").unwrap(), Vec::<u64>::new());
        assert_eq!(parse_sweep(" 2, 4 ,8").unwrap(), vec![2, 4, 8]);
        assert_eq!(parse_sweep("2,x").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(execute(&args(BenchProtocol::Intpsi, "")).unwrap(), HEADER);
        assert_eq!(execute(&args(BenchProtocol::Hampsi, "")).unwrap(), HEADER);
    }

    #[test]
    fn one_row_per_variant() {
        let csv = execute(&BenchArgs { backend: BackendArg::Dh, ..args(BenchProtocol::Intpsi, "2,16") }).unwrap();
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        let variants: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
        assert_eq!(variants, [("dyadic", "2"), ("naive", "2"), ("dyadic", "16"), ("naive", "16")]);
        let bytes = |i: usize| rows[i][2].parse::<u64>().unwrap();
        assert!(bytes(3) > bytes(1), "naive bytes grow with d");
    }

    #[test]
    fn hamming_rows() {
        let csv = execute(&args(BenchProtocol::Hampsi, "16")).unwrap();
        let names: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(names, ["recon", "restricted", "total"]);
    }
}
