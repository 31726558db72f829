//! An IdP and an SP on loopback, in-process, with frozen test clocks and
//! seeded randomness. Everything they persist lives in one temp directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use hbe_core::keystore::KeyStore;
use hbe_core::{ManualClock, Timestamp};

pub const IDP_ENTITY: &str = "https://idp.example.test";
pub const SP_ENTITY: &str = "https://sp.example.test";
pub const CLOCK_START: i64 = 1_700_000_000;

#[derive(Debug, thiserror::Error)]
pub enum TestbedError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("idp: {0}")]
    Idp(#[from] hbe_idp::provider::StartError),
    #[error("idp config: {0}")]
    IdpConfig(#[from] hbe_idp::config::ConfigError),
    #[error("sp config: {0}")]
    SpConfig(#[from] hbe_sp::config::ConfigError),
    #[error(transparent)]
    KeyStore(#[from] hbe_core::keystore::KeyStoreError),
}

pub struct Testbed {
    pub idp_url: String,
    pub sp_url: String,
    dir: tempfile::TempDir,
    tasks: Vec<tokio::task::JoinHandle<()>>,
}

impl Testbed {
    /// Starts both services on the current tokio runtime.
    pub async fn start(seed: u64) -> Result<Self, TestbedError> {
        let dir = tempfile::tempdir()?;
        let mut keys = KeyStore::new();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        keys.generate("idp-master", 16, &mut rng)?;
        keys.generate("fed-sp", 16, &mut rng)?;
        std::fs::write(dir.path().join("keys"), keys.to_file_string())?;

        let idp_listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let sp_listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
        let idp_url = format!("http://{}", idp_listener.local_addr()?);
        let sp_url = format!("http://{}", sp_listener.local_addr()?);

        std::fs::write(
            dir.path().join("idp.toml"),
            format!(
                "entity_id = \"{IDP_ENTITY}\"\ndirectory = \"users.tsv\"\nkeystore = \"keys\"\n\
                 master_key_id = \"idp-master\"\ntest_clock_start = {CLOCK_START}\n\n\
                 [[federation]]\nsp_entity_id = \"{SP_ENTITY}\"\nkey_id = \"fed-sp\"\n"
            ),
        )?;
        std::fs::write(
            dir.path().join("sp.toml"),
            format!(
                "entity_id = \"{SP_ENTITY}\"\nacs_url = \"{SP_ENTITY}/acs\"\nidp_url = \"{idp_url}/sso\"\n\
                 federation_key_id = \"fed-sp\"\nkeystore = \"keys\"\ntest_clock_start = {CLOCK_START}\n"
            ),
        )?;

        let idp_cfg = hbe_idp::IdpConfig::load(&dir.path().join("idp.toml"))?;
        let idp = hbe_idp::IdentityProvider::new(
            &idp_cfg,
            &KeyStore::load(&idp_cfg.keystore)?,
            Arc::new(ManualClock::new(Timestamp(CLOCK_START))),
            Some(seed.wrapping_add(1)),
        )?;
        let sp_cfg = hbe_sp::SpConfig::load(&dir.path().join("sp.toml"))?;
        let sp = hbe_sp::ServiceProvider::new(
            &sp_cfg,
            &KeyStore::load(&sp_cfg.keystore)?,
            Arc::new(ManualClock::new(Timestamp(CLOCK_START))),
            Some(seed.wrapping_add(2)),
        )?;

        let idp_state = hbe_idp::http::AppState {
            idp: Arc::new(idp),
            test_clock: true,
        };
        let sp_state = hbe_sp::http::AppState {
            sp: Arc::new(sp),
            test_clock: true,
        };
        let tasks = vec![
            tokio::spawn(async move {
                let _ = hbe_idp::http::serve(idp_listener, idp_state).await;
            }),
            tokio::spawn(async move {
                let _ = hbe_sp::http::serve(sp_listener, sp_state).await;
            }),
        ];
        Ok(Self {
            idp_url,
            sp_url,
            dir,
            tasks,
        })
    }

    pub fn data_dir(&self) -> &Path {
        self.dir.path()
    }

    /// Every regular file the services and their setup wrote.
    pub fn persisted_files(&self) -> std::io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        let mut stack = vec![self.dir.path().to_owned()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(d)? {
                let entry = entry?;
                if entry.file_type()?.is_dir() {
                    stack.push(entry.path());
                } else {
                    out.push(entry.path());
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

impl Drop for Testbed {
    fn drop(&mut self) {
        for t in &self.tasks {
            t.abort();
        }
    }
}
