//! The service provider's protocol logic, independent of HTTP.

use std::sync::{Arc, Mutex};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hbe_core::kex::SealingKey;
use hbe_core::keystore::KeyStore;
use hbe_core::saml::{
    decrypt_validate, encode_param, AssertionReject, AuthnRequest, SsoResponse, PARAM_REQUEST,
};
use hbe_core::{Clock, Timestamp};

use crate::config::{ConfigError, SpConfig};
use crate::state::{PendingRequests, ReplayCache, ResourceSession, Sessions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ConsumeReject {
    #[error("malformed")]
    Malformed,
    #[error("unknown-request")]
    UnknownRequest,
    #[error("{}", .0.reason())]
    Assertion(AssertionReject),
    #[error("replayed")]
    Replayed,
}

impl ConsumeReject {
    pub fn reason(self) -> &'static str {
        match self {
            Self::Malformed => "malformed",
            Self::UnknownRequest => "unknown-request",
            Self::Assertion(a) => a.reason(),
            Self::Replayed => "replayed",
        }
    }
}

/// A gate decision: where to send the browser and the request it carries.
#[derive(Debug, Clone)]
pub struct Redirect {
    pub request: AuthnRequest,
    pub location: String,
}

pub struct ServiceProvider {
    entity_id: String,
    acs_url: String,
    idp_url: String,
    key: SealingKey,
    skew: i64,
    session_lifetime: i64,
    pending: PendingRequests,
    replay: ReplayCache,
    sessions: Sessions,
    rng: Mutex<ChaCha20Rng>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for ServiceProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceProvider")
            .field("entity_id", &self.entity_id)
            .finish_non_exhaustive()
    }
}

impl ServiceProvider {
    pub fn new(
        config: &SpConfig,
        keys: &KeyStore,
        clock: Arc<dyn Clock>,
        seed: Option<u64>,
    ) -> Result<Self, ConfigError> {
        config.validate(keys)?;
        let rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_os_rng(),
        };
        Ok(Self {
            entity_id: config.entity_id.clone(),
            acs_url: config.acs_url.clone(),
            idp_url: config.idp_url.clone(),
            key: keys.sealing_key(&config.federation_key_id)?,
            skew: config.clock_skew,
            session_lifetime: config.session_lifetime,
            pending: PendingRequests::new(config.pending_window),
            replay: ReplayCache::new(),
            sessions: Sessions::new(),
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

    pub fn replay_cache(&self) -> &ReplayCache {
        &self.replay
    }

    pub fn pending(&self) -> &PendingRequests {
        &self.pending
    }

    /// Issues a fresh AuthnRequest and records it as pending.
    pub fn gate_resource(&self, now: Timestamp) -> Redirect {
        let request = {
            let mut rng = self.rng.lock().expect("rng poisoned");
            AuthnRequest::new(&self.entity_id, &self.acs_url, now, &mut *rng)
        };
        self.pending.record(&request.id, now);
        let sep = if self.idp_url.contains('?') { '&' } else { '?' };
        let query = serde_urlencoded::to_string([(PARAM_REQUEST, encode_param(&request.to_xml()))])
            .expect("string pairs always encode");
        Redirect {
            location: format!("{}{sep}{query}", self.idp_url),
            request,
        }
    }

    pub fn consume_response(
        &self,
        response: &SsoResponse,
        now: Timestamp,
    ) -> Result<ResourceSession, ConsumeReject> {
        let rid = &response.in_response_to;
        if self.pending.get(rid, now).is_none() {
            return Err(ConsumeReject::UnknownRequest);
        }
        let assertion = decrypt_validate(
            &response.encrypted_assertion,
            &self.key,
            now,
            self.skew,
            &self.entity_id,
        )
        .map_err(ConsumeReject::Assertion)?;
        let expiry = assertion.not_on_or_after.plus(self.skew);
        if !self.replay.check_and_insert(&assertion.id, expiry, now) {
            return Err(ConsumeReject::Replayed);
        }
        // A second, distinct assertion for an already answered request.
        if !self.pending.answer(rid, now) {
            return Err(ConsumeReject::UnknownRequest);
        }
        let mut token = [0u8; 16];
        self.rng
            .lock()
            .expect("rng poisoned")
            .fill_bytes(&mut token);
        let session = ResourceSession {
            token: hex::encode(token),
            subject: assertion.subject,
            expires_at: now.plus(self.session_lifetime),
        };
        self.sessions.insert(session.clone(), now);
        Ok(session)
    }

    pub fn serve_resource(&self, token: &str, now: Timestamp) -> Option<String> {
        self.sessions
            .lookup(token, now)
            .map(|s| format!("protected resource for {}\n", s.subject))
    }
}
