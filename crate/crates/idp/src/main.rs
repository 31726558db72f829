use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use hbe_core::keystore::KeyStore;
use hbe_core::{Clock, ManualClock, SystemClock, Timestamp};
use hbe_idp::http::{serve, AppState};
use hbe_idp::{IdentityProvider, IdpConfig};

#[derive(Parser)]
#[command(name = "idp", about = "PIN-pad single sign-on identity provider")]
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
        #[arg(long, env = "IDP_LISTEN")]
        listen: Option<String>,
        /// Freeze the clock at `test_clock_start` and honor the
        /// x-test-clock-skew header.
        #[arg(long)]
        test_clock: bool,
        /// Seed for the randomness source.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Add a random key to a keystore file, creating it if needed.
    Keygen {
        #[arg(long)]
        keystore: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u16).range(128..=256))]
        bits: u16,
    },
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Serve {
            config,
            listen,
            test_clock,
            seed,
        } => {
            let cfg = IdpConfig::load(&config)?;
            let keys = KeyStore::load(&cfg.keystore)?;
            let clock: Arc<dyn Clock> = if test_clock {
                Arc::new(ManualClock::new(Timestamp(cfg.test_clock_start)))
            } else {
                Arc::new(SystemClock)
            };
            let idp = IdentityProvider::new(&cfg, &keys, clock, seed)?;
            let addr = listen.unwrap_or_else(|| cfg.listen.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(&addr).await?;
                tracing::info!(addr = %listener.local_addr()?, entity = idp.entity_id(), "idp listening");
                serve(
                    listener,
                    AppState {
                        idp: Arc::new(idp),
                        test_clock,
                    },
                )
                .await
            })?;
        }
        Command::Keygen { keystore, id, bits } => {
            let mut keys = if keystore.exists() {
                KeyStore::load(&keystore)?
            } else {
                KeyStore::new()
            };
            if !matches!(bits, 128 | 192 | 256) {
                return Err("--bits must be 128, 192 or 256".into());
            }
            keys.generate(&id, usize::from(bits / 8), &mut ChaCha20Rng::from_os_rng())?;
            std::fs::write(&keystore, keys.to_file_string())?;
        }
    }
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
            eprintln!("idp: {e}");
            ExitCode::FAILURE
        }
    }
}
