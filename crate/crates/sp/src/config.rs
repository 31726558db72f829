use std::path::{Path, PathBuf};

use serde::Deserialize;

use hbe_core::keystore::{KeyStore, KeyStoreError};
use hbe_core::saml::DEFAULT_CLOCK_SKEW_SECS;

fn default_listen() -> String {
    "127.0.0.1:8701".into()
}
fn default_skew() -> i64 {
    DEFAULT_CLOCK_SKEW_SECS
}
fn default_session_lifetime() -> i64 {
    900
}
fn default_pending_window() -> i64 {
    300
}
fn default_test_clock_start() -> i64 {
    1_700_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpConfig {
    pub entity_id: String,
    pub acs_url: String,
    /// SSO endpoint of the IdP; the gate redirects here.
    pub idp_url: String,
    pub federation_key_id: String,
    pub keystore: PathBuf,
    #[serde(default = "default_skew")]
    pub clock_skew: i64,
    #[serde(default = "default_session_lifetime")]
    pub session_lifetime: i64,
    /// How long an issued AuthnRequest stays acceptable.
    #[serde(default = "default_pending_window")]
    pub pending_window: i64,
    #[serde(default = "default_listen")]
    pub listen: String,
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

impl SpConfig {
    /// Reads a TOML config; a relative keystore path is taken relative to
    /// the config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg: SpConfig = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.to_owned(),
            source,
        })?;
        cfg.keystore = path.parent().unwrap_or(Path::new(".")).join(&cfg.keystore);
        Ok(cfg)
    }

    pub fn validate(&self, keys: &KeyStore) -> Result<(), ConfigError> {
        if self.clock_skew < 0 {
            return Err(ConfigError::Invalid(
                "clock_skew must not be negative".into(),
            ));
        }
        if self.session_lifetime <= 0 || self.pending_window <= 0 {
            return Err(ConfigError::Invalid(
                "session_lifetime and pending_window must be positive".into(),
            ));
        }
        keys.sealing_key(&self.federation_key_id)?;
        Ok(())
    }
}
