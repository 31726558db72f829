//! Message formats on the IdP's HTTP interface.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use hbe_core::kex::{Challenge, CHALLENGE_NONCE_LEN, SALT_LEN};
use hbe_core::Timestamp;

/// Header carrying a clock offset in seconds; honored only in test-clock mode.
pub const TEST_CLOCK_HEADER: &str = "x-test-clock-skew";

/// `GET /challenge` body: the challenge plus the salt and iteration count
/// the user's device needs to derive its long-term key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengeDocument {
    pub id: String,
    pub user: String,
    pub nonce: [u8; CHALLENGE_NONCE_LEN],
    pub issue_instant: Timestamp,
    pub not_on_or_after: Timestamp,
    pub salt: [u8; SALT_LEN],
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid challenge document: {0}")]
pub struct ChallengeDocError(pub String);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl ChallengeDocument {
    pub fn new(ch: &Challenge, salt: [u8; SALT_LEN], iterations: u32) -> Self {
        Self {
            id: ch.id(),
            user: ch.user_id.clone(),
            nonce: ch.nonce,
            issue_instant: ch.issued_at,
            not_on_or_after: ch.expires_at,
            salt,
            iterations,
        }
    }

    pub fn challenge(&self) -> Challenge {
        Challenge {
            user_id: self.user.clone(),
            nonce: self.nonce,
            issued_at: self.issue_instant,
            expires_at: self.not_on_or_after,
        }
    }

    pub fn to_xml(&self) -> String {
        format!(
            r#"<Challenge ID="{}" User="{}" Nonce="{}" IssueInstant="{}" NotOnOrAfter="{}" Salt="{}" Iterations="{}"/>"#,
            self.id,
            escape(&self.user),
            STANDARD.encode(self.nonce),
            self.issue_instant,
            self.not_on_or_after,
            STANDARD.encode(self.salt),
            self.iterations
        )
    }

    pub fn from_xml(xml: &str) -> Result<Self, ChallengeDocError> {
        let err = |m: &str| ChallengeDocError(m.to_owned());
        let doc = roxmltree::Document::parse(xml).map_err(|e| ChallengeDocError(e.to_string()))?;
        let root = doc.root_element();
        if root.tag_name().name() != "Challenge" {
            return Err(err("root is not <Challenge>"));
        }
        let attr = |name: &str| {
            root.attribute(name)
                .ok_or_else(|| ChallengeDocError(format!("missing {name}")))
        };
        let bytes16 = |name: &str| -> Result<[u8; 16], ChallengeDocError> {
            STANDARD
                .decode(attr(name)?)
                .ok()
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| ChallengeDocError(format!("{name} is not 16 octets")))
        };
        let ts = |name: &str| {
            Timestamp::parse_rfc3339(attr(name)?).map_err(|e| ChallengeDocError(e.to_string()))
        };
        Ok(Self {
            id: attr("ID")?.to_owned(),
            user: attr("User")?.to_owned(),
            nonce: bytes16("Nonce")?,
            issue_instant: ts("IssueInstant")?,
            not_on_or_after: ts("NotOnOrAfter")?,
            salt: bytes16("Salt")?,
            iterations: attr("Iterations")?
                .parse()
                .map_err(|_| err("bad Iterations"))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterForm {
    pub user: String,
    pub pin: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsoForm {
    #[serde(rename = "SAMLRequest")]
    pub saml_request: String,
    pub user: String,
    #[serde(rename = "challenge-id")]
    pub challenge_id: String,
    /// Base64 of the 16-octet answer tag.
    pub answer: String,
}

/// `POST /sso` success body (form-encoded).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsoGrant {
    #[serde(rename = "SAMLResponse")]
    pub saml_response: String,
    /// Session key sealed under the user's long-term key (wire encoding).
    #[serde(rename = "SessionKey")]
    pub session_key: String,
}
