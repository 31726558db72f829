use std::path::{Path, PathBuf};

use serde::Deserialize;

use hbe_core::kex::{DEFAULT_CHALLENGE_EXPIRY_SECS, DEFAULT_ITERATIONS};
use hbe_core::keystore::{KeyStore, KeyStoreError};

#[derive(Debug, Clone, Deserialize, PartialEq, Eq)]
pub struct Federation {
    pub sp_entity_id: String,
    pub key_id: String,
}

fn default_listen() -> String {
    "127.0.0.1:8700".into()
}
fn default_assertion_lifetime() -> i64 {
    120
}
fn default_challenge_expiry() -> i64 {
    DEFAULT_CHALLENGE_EXPIRY_SECS
}
fn default_iterations() -> u32 {
    DEFAULT_ITERATIONS
}
fn default_session_key_lifetime() -> u32 {
    3600
}
fn default_test_clock_start() -> i64 {
    1_700_000_000
}

/// IdP settings, usually read from a TOML file. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdpConfig {
    pub entity_id: String,
    #[serde(default = "default_listen")]
    pub listen: String,
    pub directory: PathBuf,
    pub keystore: PathBuf,
    pub master_key_id: String,
    #[serde(default)]
    pub federation: Vec<Federation>,
    #[serde(default = "default_assertion_lifetime")]
    pub assertion_lifetime: i64,
    #[serde(default = "default_challenge_expiry")]
    pub challenge_expiry: i64,
    #[serde(default = "default_iterations")]
    pub kdf_iterations: u32,
    #[serde(default = "default_session_key_lifetime")]
    pub session_key_lifetime: u32,
    /// Start instant of the frozen clock used with `--test-clock`.
    #[serde(default = "default_test_clock_start")]
    pub test_clock_start: i64,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error(transparent)]
    KeyStore(#[from] KeyStoreError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl IdpConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg: IdpConfig = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.directory = base.join(&cfg.directory);
        cfg.keystore = base.join(&cfg.keystore);
        Ok(cfg)
    }

    /// Checks ranges and that every referenced key resolves in `keys`.
    pub fn validate(&self, keys: &KeyStore) -> Result<(), ConfigError> {
        if self.assertion_lifetime <= 0 || self.challenge_expiry <= 0 {
            return Err(ConfigError::Invalid(
                "assertion_lifetime and challenge_expiry must be positive".into(),
            ));
        }
        if self.kdf_iterations == 0 {
            return Err(ConfigError::Invalid(
                "kdf_iterations must be at least 1".into(),
            ));
        }
        keys.sealing_key(&self.master_key_id)?;
        for fed in &self.federation {
            keys.sealing_key(&fed.key_id)?;
        }
        Ok(())
    }
}
