//! A minimal SAML dialect: assertions, authentication requests and
//! responses, with assertions always encrypted and MAC-protected.

mod binding;
mod model;
mod protect;
mod xml;

pub use binding::{decode_param, encode_param, PARAM_REQUEST, PARAM_RESPONSE};
pub use model::{
    build_assertion, random_id, Assertion, AuthnRequest, EncryptedAssertion, Message, SsoResponse,
    AUTHN_METHOD,
};
pub use protect::{decrypt_validate, encrypt_assertion, AssertionReject, DEFAULT_CLOCK_SKEW_SECS};
pub use xml::{parse, serialize, NS_ASSERTION, NS_PROTOCOL};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamlError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("unknown root element <{0}>")]
    UnknownRoot(String),
    #[error("expected a {0} message")]
    UnexpectedMessage(&'static str),
    #[error("missing required field {0}")]
    MissingField(&'static str),
    #[error("unparseable timestamp in {field}: {value:?}")]
    BadTimestamp { field: &'static str, value: String },
    #[error("invalid {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("assertion lifetime must be positive, got {0}")]
    NonPositiveLifetime(i64),
}
