//! Key-store files: one `key-id base64-key` pair per line. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::RngCore;

use crate::kex::{KeyError, SealingKey};

#[derive(Debug, thiserror::Error)]
pub enum KeyStoreError {
    #[error("reading key store: {0}")]
    Io(#[from] std::io::Error),
    #[error("key store line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("key {0:?} not found in key store")]
    Missing(String),
    #[error("key {id:?}: {source}")]
    InvalidKey { id: String, source: KeyError },
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct KeyStore {
    keys: BTreeMap<String, Vec<u8>>,
}

impl std::fmt::Debug for KeyStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyStore")
            .field("ids", &self.keys.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl KeyStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, KeyStoreError> {
        let mut keys = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split_whitespace();
            let (Some(id), Some(b64), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(KeyStoreError::Parse {
                    line,
                    reason: "expected `key-id base64-key`".into(),
                });
            };
            let material = STANDARD.decode(b64).map_err(|e| KeyStoreError::Parse {
                line,
                reason: format!("bad base64: {e}"),
            })?;
            SealingKey::new(id, &material).map_err(|e| KeyStoreError::Parse {
                line,
                reason: e.to_string(),
            })?;
            if keys.insert(id.to_owned(), material).is_some() {
                return Err(KeyStoreError::Parse {
                    line,
                    reason: format!("duplicate key id {id:?}"),
                });
            }
        }
        Ok(Self { keys })
    }

    pub fn load(path: &Path) -> Result<Self, KeyStoreError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn insert(&mut self, id: &str, material: &[u8]) -> Result<(), KeyStoreError> {
        SealingKey::new(id, material).map_err(|source| KeyStoreError::InvalidKey {
            id: id.to_owned(),
            source,
        })?;
        self.keys.insert(id.to_owned(), material.to_vec());
        Ok(())
    }

    /// Adds a fresh random key of `len` octets.
    pub fn generate<R: RngCore + ?Sized>(
        &mut self,
        id: &str,
        len: usize,
        rng: &mut R,
    ) -> Result<(), KeyStoreError> {
        let mut material = vec![0u8; len];
        rng.fill_bytes(&mut material);
        self.insert(id, &material)
    }

    pub fn material(&self, id: &str) -> Result<&[u8], KeyStoreError> {
        self.keys
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| KeyStoreError::Missing(id.to_owned()))
    }

    pub fn sealing_key(&self, id: &str) -> Result<SealingKey, KeyStoreError> {
        SealingKey::new(id, self.material(id)?).map_err(|source| KeyStoreError::InvalidKey {
            id: id.to_owned(),
            source,
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.keys.keys().map(String::as_str)
    }

    pub fn to_file_string(&self) -> String {
        self.keys
            .iter()
            .map(|(id, k)| format!("{id} {}\n", STANDARD.encode(k)))
            .collect()
    }
}
