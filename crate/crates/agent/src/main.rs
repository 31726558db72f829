use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hbe_agent::{run_suite, Endpoints, Testbed};

#[derive(Parser)]
#[command(name = "agent", about = "Scripted SSO user agent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file against an IdP and an SP.
    Run {
        #[arg(long)]
        suite: PathBuf,
        /// IdP base URL.
        #[arg(long, required_unless_present = "spawn")]
        idp: Option<String>,
        /// SP base URL.
        #[arg(long, required_unless_present = "spawn")]
        sp: Option<String>,
        /// Start an in-process IdP and SP on loopback instead.
        #[arg(long, conflicts_with_all = ["idp", "sp"])]
        spawn: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run scenarios concurrently.
        #[arg(long)]
        parallel: bool,
        /// Print every exchange.
        #[arg(long)]
        transcript: bool,
    },
}

#[tokio::main]
async fn main() -> ExitCode {
    let Command::Run {
        suite,
        idp,
        sp,
        spawn,
        seed,
        parallel,
        transcript,
    } = Cli::parse().command;

    let testbed = if spawn {
        match Testbed::start(seed).await {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("agent: starting services: {e}");
                return ExitCode::from(2);
            }
        }
    } else {
        None
    };
    let endpoints = match &testbed {
        Some(t) => Endpoints::new(&t.idp_url, &t.sp_url),
        None => Endpoints::new(
            idp.as_deref().expect("required by clap"),
            sp.as_deref().expect("required by clap"),
        ),
    };
    match run_suite(&suite, &endpoints, seed, parallel).await {
        Ok(summary) => {
            if transcript {
                for r in &summary.results {
                    println!("== {}", r.name);
                    print!("{}", r.transcript_text());
                }
            }
            println!("{summary}");
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("agent: {e}");
            ExitCode::from(2)
        }
    }
}
