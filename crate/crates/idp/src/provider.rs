//! The identity provider's protocol logic, independent of HTTP.

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hbe_core::cipher::{CipherKey, Hbe};
use hbe_core::kex::{
    derive_long_term_key, open, random_nonce, seal, wrap_session_key, ChallengeBook,
    ChallengeError, KdfError, LongTermKey, SealedPayload, SealingKey, SessionKey, SALT_LEN,
};
use hbe_core::keystore::KeyStore;
use hbe_core::mac::MacTag;
use hbe_core::saml::{build_assertion, encrypt_assertion, AuthnRequest, SsoResponse};
use hbe_core::{Clock, Timestamp};

use crate::config::{ConfigError, IdpConfig};
use crate::directory::{valid_user_id, Directory, DirectoryError, UserRecord};
use crate::wire::ChallengeDocument;

#[derive(Debug, thiserror::Error)]
pub enum RegisterError {
    #[error("duplicate-user")]
    DuplicateUser,
    #[error("invalid-pin: {0}")]
    InvalidPin(#[from] KdfError),
    #[error("invalid-user-id")]
    InvalidUserId,
    #[error("persisting directory: {0}")]
    Persist(#[from] DirectoryError),
}

#[derive(Debug, thiserror::Error)]
pub enum AuthnError {
    #[error("unknown-user")]
    UnknownUser,
    #[error("unknown-sp")]
    UnknownSp,
    #[error("{}", .0.reason())]
    Challenge(#[from] ChallengeError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl AuthnError {
    /// Reason string shown on the wire. Unknown users look exactly like a
    /// failed answer.
    pub fn wire_reason(&self) -> &'static str {
        match self {
            Self::UnknownUser => ChallengeError::Auth.reason(),
            Self::UnknownSp => "unknown-sp",
            Self::Challenge(e) => e.reason(),
            Self::Internal(_) => "internal-error",
        }
    }
}

/// What a successful authentication yields.
#[derive(Debug, Clone)]
pub struct SsoGrant {
    pub response: SsoResponse,
    pub wrapped_session_key: SealedPayload,
    pub assertion_id: String,
}

struct FederatedSp {
    key: SealingKey,
}

pub struct IdentityProvider {
    entity_id: String,
    directory_path: PathBuf,
    master: SealingKey,
    decoy: Hbe,
    federation: HashMap<String, FederatedSp>,
    assertion_lifetime: i64,
    kdf_iterations: u32,
    session_key_lifetime: u32,
    directory: RwLock<Directory>,
    challenges: ChallengeBook,
    issued_assertions: Mutex<HashSet<String>>,
    rng: Mutex<ChaCha20Rng>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for IdentityProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityProvider")
            .field("entity_id", &self.entity_id)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading directory: {0}")]
    Directory(#[from] DirectoryError),
}

impl IdentityProvider {
    /// `seed` fixes the randomness source (ids, salts, nonces, keys) for
    /// reproducible runs; `None` seeds from the OS.
    pub fn new(
        config: &IdpConfig,
        keys: &KeyStore,
        clock: Arc<dyn Clock>,
        seed: Option<u64>,
    ) -> Result<Self, StartError> {
        config.validate(keys)?;
        let master = keys
            .sealing_key(&config.master_key_id)
            .map_err(ConfigError::from)?;
        let decoy = Hbe::new(
            &CipherKey::new(
                keys.material(&config.master_key_id)
                    .map_err(ConfigError::from)?,
            )
            .map_err(|e| ConfigError::Invalid(e.to_string()))?,
        );
        let mut federation = HashMap::new();
        for fed in &config.federation {
            let key = keys.sealing_key(&fed.key_id).map_err(ConfigError::from)?;
            federation.insert(fed.sp_entity_id.clone(), FederatedSp { key });
        }
        let directory = Directory::load(&config.directory)?;
        let rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_os_rng(),
        };
        Ok(Self {
            entity_id: config.entity_id.clone(),
            directory_path: config.directory.clone(),
            master,
            decoy,
            federation,
            assertion_lifetime: config.assertion_lifetime,
            kdf_iterations: config.kdf_iterations,
            session_key_lifetime: config.session_key_lifetime,
            directory: RwLock::new(directory),
            challenges: ChallengeBook::new(config.challenge_expiry),
            issued_assertions: Mutex::new(HashSet::new()),
            rng: Mutex::new(rng),
            clock,
        })
    }

    pub fn entity_id(&self) -> &str {
        &self.entity_id
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    fn with_rng<T>(&self, f: impl FnOnce(&mut ChaCha20Rng) -> T) -> T {
        f(&mut self.rng.lock().expect("rng poisoned"))
    }

    pub fn directory_snapshot(&self) -> Directory {
        self.directory.read().expect("directory poisoned").clone()
    }

    /// Derives and seals the user's long-term key, then persists the
    /// directory before reporting success.
    pub fn register_user(
        &self,
        user_id: &str,
        pin: &[u8],
        now: Timestamp,
    ) -> Result<UserRecord, RegisterError> {
        if !valid_user_id(user_id) {
            return Err(RegisterError::InvalidUserId);
        }
        hbe_core::kex::pad_pin(pin)?;
        let mut dir = self.directory.write().expect("directory poisoned");
        if dir.contains(user_id) {
            return Err(RegisterError::DuplicateUser);
        }
        let salt = self.with_rng(|rng| loop {
            let mut salt = [0u8; SALT_LEN];
            rng.fill_bytes(&mut salt);
            if !dir.salt_in_use(&salt) {
                break salt;
            }
        });
        let ltk = derive_long_term_key(pin, &salt, self.kdf_iterations)?;
        let nonce = self.with_rng(random_nonce);
        let record = UserRecord {
            user_id: user_id.to_owned(),
            salt,
            wrapped_ltk: seal(&self.master, nonce, ltk.as_bytes(), user_id.as_bytes()),
            created_at: now,
        };
        dir.insert(record.clone());
        if let Err(e) = dir.persist(&self.directory_path) {
            dir.remove(user_id);
            return Err(e.into());
        }
        tracing::info!(user = user_id, "registered user");
        Ok(record)
    }

    /// A salt for users that do not exist, stable per user id, so the
    /// challenge shape does not reveal whether an account exists.
    fn decoy_salt(&self, user_id: &str) -> [u8; SALT_LEN] {
        let mut block = [0u8; 16];
        block[..8].copy_from_slice(&(user_id.len() as u64).to_be_bytes());
        block[8..].copy_from_slice(b"decoy-v1");
        let mut state = self.decoy.encrypt(block);
        for chunk in user_id.as_bytes().chunks(16) {
            for (s, b) in state.iter_mut().zip(chunk) {
                *s ^= b;
            }
            state = self.decoy.encrypt(state);
        }
        state
    }

    /// First leg: issue a challenge. Unknown users get a decoy challenge
    /// that can never be answered.
    pub fn issue_challenge(&self, user_id: &str, now: Timestamp) -> ChallengeDocument {
        let salt = self
            .directory
            .read()
            .expect("directory poisoned")
            .get(user_id)
            .map(|r| r.salt);
        let ch = self.with_rng(|rng| self.challenges.issue(user_id, now, rng));
        let salt = salt.unwrap_or_else(|| self.decoy_salt(user_id));
        ChallengeDocument::new(&ch, salt, self.kdf_iterations)
    }

    fn unwrap_ltk(&self, record: &UserRecord) -> Result<LongTermKey, AuthnError> {
        let bytes = open(&self.master, &record.wrapped_ltk, record.user_id.as_bytes())
            .map_err(|_| AuthnError::Internal("stored key failed to open".into()))?;
        let bytes: [u8; 16] = bytes
            .try_into()
            .map_err(|_| AuthnError::Internal("stored key has wrong length".into()))?;
        Ok(LongTermKey(bytes))
    }

    /// Second leg: verify the answer and issue an encrypted assertion for
    /// the requesting SP.
    pub fn handle_authn(
        &self,
        user_id: &str,
        request: &AuthnRequest,
        challenge_id: &str,
        answer: &MacTag,
        now: Timestamp,
    ) -> Result<SsoGrant, AuthnError> {
        let sp = self
            .federation
            .get(&request.sp_entity_id)
            .ok_or(AuthnError::UnknownSp)?;
        let record = self
            .directory
            .read()
            .expect("directory poisoned")
            .get(user_id)
            .cloned();
        let Some(record) = record else {
            // Burn the decoy challenge so it behaves like a real one.
            self.challenges.take(challenge_id, now)?;
            return Err(AuthnError::UnknownUser);
        };
        let ltk = self.unwrap_ltk(&record)?;
        self.challenges
            .verify(&ltk, challenge_id, user_id, answer, now)?;

        let mut rng = self.rng.lock().expect("rng poisoned");
        let assertion = {
            let mut issued = self.issued_assertions.lock().expect("id set poisoned");
            loop {
                let a = build_assertion(
                    &self.entity_id,
                    user_id,
                    &request.sp_entity_id,
                    now,
                    self.assertion_lifetime,
                    &mut *rng,
                )
                .map_err(|e| AuthnError::Internal(e.to_string()))?;
                if issued.insert(a.id.clone()) {
                    break a;
                }
            }
        };
        let response = SsoResponse {
            in_response_to: request.id.clone(),
            issuer: self.entity_id.clone(),
            encrypted_assertion: encrypt_assertion(&assertion, &sp.key, &mut *rng),
        };
        let session_key = SessionKey::generate(&mut *rng, now, self.session_key_lifetime);
        let wrapped_session_key = wrap_session_key(&ltk, user_id, &session_key, &mut *rng);
        tracing::info!(
            user = user_id,
            sp = %request.sp_entity_id,
            assertion = %assertion.id,
            "issued assertion"
        );
        Ok(SsoGrant {
            response,
            wrapped_session_key,
            assertion_id: assertion.id,
        })
    }
}
