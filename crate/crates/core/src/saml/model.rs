use rand::RngCore;

use super::SamlError;
use crate::kex::SealedPayload;
use crate::time::Timestamp;

/// Authentication context recorded in every assertion.
pub const AUTHN_METHOD: &str = "PIN-PAD";

/// A fresh 128-bit identifier as 32 lowercase hex digits.
pub fn random_id<R: RngCore + ?Sized>(rng: &mut R) -> String {
    let mut bytes = [0u8; 16];
    rng.fill_bytes(&mut bytes);
    hex::encode(bytes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub id: String,
    pub issuer: String,
    pub subject: String,
    pub issue_instant: Timestamp,
    pub not_before: Timestamp,
    pub not_on_or_after: Timestamp,
    pub audience: String,
    pub authn_method: String,
}

impl Assertion {
    /// `not_before ≤ issue_instant < not_on_or_after`
    pub fn window_is_consistent(&self) -> bool {
        self.not_before <= self.issue_instant && self.issue_instant < self.not_on_or_after
    }
}

pub fn build_assertion<R: RngCore + ?Sized>(
    issuer: &str,
    subject: &str,
    audience: &str,
    now: Timestamp,
    lifetime_secs: i64,
    rng: &mut R,
) -> Result<Assertion, SamlError> {
    if lifetime_secs <= 0 {
        return Err(SamlError::NonPositiveLifetime(lifetime_secs));
    }
    Ok(Assertion {
        id: random_id(rng),
        issuer: issuer.to_owned(),
        subject: subject.to_owned(),
        issue_instant: now,
        not_before: now,
        not_on_or_after: now.plus(lifetime_secs),
        audience: audience.to_owned(),
        authn_method: AUTHN_METHOD.to_owned(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthnRequest {
    pub id: String,
    pub sp_entity_id: String,
    pub acs_url: String,
    pub issue_instant: Timestamp,
}

impl AuthnRequest {
    pub fn new<R: RngCore + ?Sized>(
        sp_entity_id: &str,
        acs_url: &str,
        now: Timestamp,
        rng: &mut R,
    ) -> Self {
        Self {
            id: random_id(rng),
            sp_entity_id: sp_entity_id.to_owned(),
            acs_url: acs_url.to_owned(),
            issue_instant: now,
        }
    }
}

/// An assertion sealed under a federation key. The plaintext is the
/// assertion's canonical XML.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedAssertion {
    pub sealed: SealedPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsoResponse {
    pub in_response_to: String,
    pub issuer: String,
    pub encrypted_assertion: EncryptedAssertion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Assertion(Assertion),
    AuthnRequest(AuthnRequest),
    Response(SsoResponse),
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn lifetime_window() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let a = build_assertion("idp", "alice", "sp", Timestamp(1_000), 300, &mut rng).unwrap();
        assert_eq!(a.not_on_or_after.unix() - a.not_before.unix(), 300);
        assert_eq!(a.not_before, a.issue_instant);
        assert!(a.window_is_consistent());
        assert_eq!(a.authn_method, AUTHN_METHOD);
    }

    #[test]
    fn distinct_ids() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let a = build_assertion("idp", "alice", "sp", Timestamp(0), 10, &mut rng).unwrap();
        let b = build_assertion("idp", "alice", "sp", Timestamp(0), 10, &mut rng).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(a.id.len(), 32);
    }

    #[test]
    fn rejects_non_positive_lifetime() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for l in [0, -1] {
            assert_eq!(
                build_assertion("idp", "a", "sp", Timestamp(0), l, &mut rng),
                Err(SamlError::NonPositiveLifetime(l))
            );
        }
    }
}
