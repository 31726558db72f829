//! Single-use PIN challenges.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::RngCore;

use super::kdf::LongTermKey;
use super::seal::{derive_mac_key, Nonce, NONCE_LEN};
use crate::cipher::{CipherKey, Hbe};
use crate::mac::{mac_compute, mac_verify, MacTag};
use crate::time::Timestamp;

pub const CHALLENGE_NONCE_LEN: usize = 16;
pub const DEFAULT_CHALLENGE_EXPIRY_SECS: i64 = 60;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub user_id: String,
    pub nonce: [u8; CHALLENGE_NONCE_LEN],
    pub issued_at: Timestamp,
    pub expires_at: Timestamp,
}

impl Challenge {
    /// Lowercase hex of the nonce.
    pub fn id(&self) -> String {
        hex::encode(self.nonce)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ChallengeError {
    #[error("reject-auth")]
    Auth,
    #[error("reject-expired")]
    Expired,
    #[error("reject-replay")]
    Replay,
}

impl ChallengeError {
    pub fn reason(self) -> &'static str {
        match self {
            Self::Auth => "reject-auth",
            Self::Expired => "reject-expired",
            Self::Replay => "reject-replay",
        }
    }
}

/// The message a challenge answer authenticates.
fn challenge_message(ch: &Challenge) -> Vec<u8> {
    let mut msg = Vec::with_capacity(ch.user_id.len() + 1 + CHALLENGE_NONCE_LEN);
    msg.extend_from_slice(ch.user_id.as_bytes());
    msg.push(0);
    msg.extend_from_slice(&ch.nonce);
    msg
}

fn mac_nonce(ch: &Challenge) -> Nonce {
    let mut n = [0u8; NONCE_LEN];
    n.copy_from_slice(&ch.nonce[..NONCE_LEN]);
    n
}

fn ltk_cipher(ltk: &LongTermKey) -> Hbe {
    Hbe::new(&CipherKey::new(ltk.as_bytes()).expect("16-octet key"))
}

/// The user side: MAC over the challenge with a one-time key derived from
/// the long-term key and the challenge nonce.
pub fn answer_challenge(ltk: &LongTermKey, ch: &Challenge) -> MacTag {
    let key = derive_mac_key(&ltk_cipher(ltk), &mac_nonce(ch));
    mac_compute(&key, &challenge_message(ch))
}

pub fn check_answer(ltk: &LongTermKey, ch: &Challenge, tag: &MacTag) -> bool {
    let key = derive_mac_key(&ltk_cipher(ltk), &mac_nonce(ch));
    mac_verify(&key, &challenge_message(ch), tag)
}

#[derive(Debug)]
enum Slot {
    Pending(Challenge),
    Consumed { forget_after: Timestamp },
}

/// Shared table of outstanding challenges.
///
/// Taking a challenge is an atomic check-and-consume, so concurrent
/// verifications of one challenge see it pending at most once.
#[derive(Debug)]
pub struct ChallengeBook {
    expiry_secs: i64,
    slots: Mutex<HashMap<String, Slot>>,
}

impl ChallengeBook {
    pub fn new(expiry_secs: i64) -> Self {
        Self {
            expiry_secs,
            slots: Mutex::new(HashMap::new()),
        }
    }

    pub fn expiry_secs(&self) -> i64 {
        self.expiry_secs
    }

    pub fn issue<R: RngCore + ?Sized>(
        &self,
        user_id: &str,
        now: Timestamp,
        rng: &mut R,
    ) -> Challenge {
        let mut nonce = [0u8; CHALLENGE_NONCE_LEN];
        rng.fill_bytes(&mut nonce);
        let ch = Challenge {
            user_id: user_id.to_owned(),
            nonce,
            issued_at: now,
            expires_at: now.plus(self.expiry_secs),
        };
        let mut slots = self.slots.lock().expect("challenge table poisoned");
        slots.retain(|_, slot| match slot {
            Slot::Pending(c) => c.expires_at.plus(self.expiry_secs) > now,
            Slot::Consumed { forget_after } => *forget_after > now,
        });
        slots.insert(ch.id(), Slot::Pending(ch.clone()));
        ch
    }

    /// Consumes the challenge whatever the outcome of the later tag check.
    pub fn take(&self, id: &str, now: Timestamp) -> Result<Challenge, ChallengeError> {
        let mut slots = self.slots.lock().expect("challenge table poisoned");
        let slot = slots.get_mut(id).ok_or(ChallengeError::Auth)?;
        let ch = match slot {
            Slot::Consumed { .. } => return Err(ChallengeError::Replay),
            Slot::Pending(ch) => ch.clone(),
        };
        *slot = Slot::Consumed {
            forget_after: ch.expires_at.plus(self.expiry_secs),
        };
        if now >= ch.expires_at {
            return Err(ChallengeError::Expired);
        }
        Ok(ch)
    }

    /// Consumes challenge `id` and checks that it was issued to `user_id`
    /// and that `tag` answers it under `ltk`.
    pub fn verify(
        &self,
        ltk: &LongTermKey,
        id: &str,
        user_id: &str,
        tag: &MacTag,
        now: Timestamp,
    ) -> Result<Challenge, ChallengeError> {
        let ch = self.take(id, now)?;
        if ch.user_id != user_id || !check_answer(ltk, &ch, tag) {
            return Err(ChallengeError::Auth);
        }
        Ok(ch)
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("challenge table poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for ChallengeBook {
    fn default() -> Self {
        Self::new(DEFAULT_CHALLENGE_EXPIRY_SECS)
    }
}
