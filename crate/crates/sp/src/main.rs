use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use hbe_core::keystore::KeyStore;
use hbe_core::{Clock, ManualClock, SystemClock, Timestamp};
use hbe_sp::http::{serve, AppState};
use hbe_sp::{ServiceProvider, SpConfig};

#[derive(Parser)]
#[command(name = "sp", about = "PIN-pad single sign-on service provider")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `listen` from the config file.
        #[arg(long, env = "SP_LISTEN")]
        listen: Option<String>,
        /// Freeze the clock at `test_clock_start` and honor the
        /// x-test-clock-skew header.
        #[arg(long)]
        test_clock: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    let Command::Serve {
        config,
        listen,
        test_clock,
        seed,
    } = cli.command;
    let cfg = SpConfig::load(&config)?;
    let keys = KeyStore::load(&cfg.keystore)?;
    let clock: Arc<dyn Clock> = if test_clock {
        Arc::new(ManualClock::new(Timestamp(cfg.test_clock_start)))
    } else {
        Arc::new(SystemClock)
    };
    let sp = ServiceProvider::new(&cfg, &keys, clock, seed)?;
    let addr = listen.unwrap_or_else(|| cfg.listen.clone());
    tokio::runtime::Runtime::new()?.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await?;
        tracing::info!(addr = %listener.local_addr()?, entity = sp.entity_id(), "sp listening");
        serve(
            listener,
            AppState {
                sp: Arc::new(sp),
                test_clock,
            },
        )
        .await
    })?;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sp: {e}");
            ExitCode::FAILURE
        }
    }
}
