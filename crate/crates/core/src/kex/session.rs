//! Session-key transport under a user's long-term key.

use std::fmt;

use rand::RngCore;

use super::kdf::LongTermKey;
use super::seal::{open, random_nonce, seal, Reject, SealedPayload, SealingKey};
use crate::time::Timestamp;

pub const LTK_KEY_ID: &str = "ltk";
const WRAPPED_LEN: usize = 16 + 8 + 4;

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SessionKey {
    pub key: [u8; 16],
    pub issued_at: Timestamp,
    pub lifetime_secs: u32,
}

impl SessionKey {
    pub fn generate<R: RngCore + ?Sized>(rng: &mut R, now: Timestamp, lifetime_secs: u32) -> Self {
        let mut key = [0u8; 16];
        rng.fill_bytes(&mut key);
        Self {
            key,
            issued_at: now,
            lifetime_secs,
        }
    }

    pub fn expires_at(&self) -> Timestamp {
        self.issued_at.plus(i64::from(self.lifetime_secs))
    }
}

impl fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionKey")
            .field("issued_at", &self.issued_at)
            .field("lifetime_secs", &self.lifetime_secs)
            .finish_non_exhaustive()
    }
}

pub fn ltk_sealing_key(ltk: &LongTermKey) -> SealingKey {
    SealingKey::new(LTK_KEY_ID, ltk.as_bytes()).expect("valid key id and length")
}

/// Seals `key ‖ issued-at ‖ lifetime` under the long-term key, bound to
/// `user_id` as associated data.
pub fn wrap_session_key<R: RngCore + ?Sized>(
    ltk: &LongTermKey,
    user_id: &str,
    sk: &SessionKey,
    rng: &mut R,
) -> SealedPayload {
    let mut pt = Vec::with_capacity(WRAPPED_LEN);
    pt.extend_from_slice(&sk.key);
    pt.extend_from_slice(&sk.issued_at.unix().to_be_bytes());
    pt.extend_from_slice(&sk.lifetime_secs.to_be_bytes());
    seal(
        &ltk_sealing_key(ltk),
        random_nonce(rng),
        &pt,
        user_id.as_bytes(),
    )
}

pub fn unwrap_session_key(
    ltk: &LongTermKey,
    user_id: &str,
    payload: &SealedPayload,
) -> Result<SessionKey, Reject> {
    let pt = open(&ltk_sealing_key(ltk), payload, user_id.as_bytes())?;
    if pt.len() != WRAPPED_LEN {
        return Err(Reject);
    }
    Ok(SessionKey {
        key: pt[..16].try_into().expect("length checked"),
        issued_at: Timestamp(i64::from_be_bytes(
            pt[16..24].try_into().expect("length checked"),
        )),
        lifetime_secs: u32::from_be_bytes(pt[24..28].try_into().expect("length checked")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn wrap_unwrap() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let ltk = LongTermKey([4; 16]);
        let sk = SessionKey::generate(&mut rng, Timestamp(1000), 600);
        let wrapped = wrap_session_key(&ltk, "alice", &sk, &mut rng);
        assert_eq!(unwrap_session_key(&ltk, "alice", &wrapped).unwrap(), sk);
        assert_eq!(sk.expires_at(), Timestamp(1600));
    }

    #[test]
    fn bound_to_user_and_key() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        let ltk = LongTermKey([4; 16]);
        let sk = SessionKey::generate(&mut rng, Timestamp(0), 60);
        let wrapped = wrap_session_key(&ltk, "alice", &sk, &mut rng);
        assert_eq!(unwrap_session_key(&ltk, "bob", &wrapped), Err(Reject));
        assert_eq!(
            unwrap_session_key(&LongTermKey([5; 16]), "alice", &wrapped),
            Err(Reject)
        );
        let mut cut = wrapped.clone();
        cut.ciphertext.truncate(20);
        assert_eq!(unwrap_session_key(&ltk, "alice", &cut), Err(Reject));
    }
}
