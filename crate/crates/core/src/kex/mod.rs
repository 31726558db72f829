//! Key exchange: PIN-derived long-term keys, challenge-response
//! authentication, session-key transport and the seal/open composition.

mod challenge;
mod kdf;
mod seal;
mod session;

pub use challenge::{
    answer_challenge, check_answer, Challenge, ChallengeBook, ChallengeError, CHALLENGE_NONCE_LEN,
    DEFAULT_CHALLENGE_EXPIRY_SECS,
};
pub use kdf::{
    derive_long_term_key, pad_pin, KdfError, LongTermKey, DEFAULT_ITERATIONS, MAX_PIN_LEN, SALT_LEN,
};
pub use seal::{
    apply_keystream, counter_block, open, random_nonce, seal, KeyError, Nonce, Reject,
    SealedPayload, SealingKey, WireError, MAX_KEY_ID_LEN, NONCE_LEN,
};
pub use session::{ltk_sealing_key, unwrap_session_key, wrap_session_key, SessionKey, LTK_KEY_ID};
