use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hbe_bench::{
    bench_comparison, emit, throughput_report, BenchReport, Format, DEFAULT_MEGABYTES,
    DEFAULT_OPERATIONS, DEFAULT_PAYLOAD_BYTES, DEFAULT_REPS,
};
use hbe_core::cipher::KeySize;

#[derive(Parser)]
#[command(name = "bench", about = "HBE timing tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Counter-mode throughput per key size.
    Throughput {
        /// Key size in bits; all three when omitted.
        #[arg(long, value_parser = parse_key_size)]
        key_size: Option<KeySize>,
        #[arg(long, default_value_t = DEFAULT_MEGABYTES)]
        megabytes: usize,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        /// Decrypt as well as encrypt in each repetition.
        #[arg(long)]
        round_trip: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cipher-only vs. sealed vs. encrypted-assertion timing.
    Compare {
        #[arg(long, default_value_t = DEFAULT_PAYLOAD_BYTES)]
        payload_bytes: usize,
        /// Operations per repetition.
        #[arg(long, default_value_t = DEFAULT_OPERATIONS)]
        operations: u64,
        #[arg(long, default_value_t = DEFAULT_REPS)]
        reps: usize,
        #[arg(long)]
        round_trip: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_key_size(s: &str) -> Result<KeySize, String> {
    s.parse::<u32>()
        .ok()
        .and_then(|b| KeySize::from_bits(b).ok())
        .ok_or_else(|| format!("key size must be 128, 192 or 256, got {s}"))
}

fn report(report: &BenchReport, format: Format) -> std::io::Result<()> {
    eprintln!(
        "machine: {}  repetitions: {}",
        report.machine, report.repetitions
    );
    for (label, ok) in report.monotonicity() {
        if !ok {
            eprintln!("warn: {label}: time is not non-decreasing in key size");
        }
    }
    std::io::stdout().write_all(&emit(report, format))
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Throughput {
            key_size,
            megabytes,
            reps,
            round_trip,
            format,
            seed,
        } => {
            let sizes = key_size.map_or(KeySize::ALL.to_vec(), |k| vec![k]);
            throughput_report(&sizes, megabytes, reps, round_trip, seed).map(|r| (r, format))
        }
        Command::Compare {
            payload_bytes,
            operations,
            reps,
            round_trip,
            format,
            seed,
        } => {
            bench_comparison(payload_bytes, operations, reps, round_trip, seed).map(|r| (r, format))
        }
    };
    match result {
        Ok((r, format)) => match report(&r, format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("bench: {e}");
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(2)
        }
    }
}
