//! Counter-mode encryption with a per-message polynomial MAC
//! (encrypt-then-MAC).
//!
//! Counter blocks are `nonce(12) ‖ ctr(4, big-endian)`. Blocks 0 and 1 give
//! the one-time MAC key `(r, s)`; the keystream starts at block 2. The tag
//! covers `aad' ‖ nonce ‖ ciphertext ‖ len(aad') ‖ len(ciphertext)` with
//! 8-octet big-endian lengths, where `aad'` is the key id (length-prefixed)
//! followed by the caller's associated data.

use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::RngCore;

use crate::cipher::{CipherError, CipherKey, Hbe, KeySize, BLOCK_LEN};
use crate::mac::{mac_compute, mac_verify, MacKey, MacTag, TAG_LEN};

pub const NONCE_LEN: usize = 12;
pub const MAX_KEY_ID_LEN: usize = u8::MAX as usize;

pub type Nonce = [u8; NONCE_LEN];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyError {
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error("key id must be 1..=255 octets, got {0}")]
    InvalidKeyId(usize),
}

/// A symmetric key together with the short identifier that travels with
/// everything sealed under it.
#[derive(Clone)]
pub struct SealingKey {
    id: String,
    cipher: Hbe,
    size: KeySize,
}

impl SealingKey {
    pub fn new(id: impl Into<String>, material: &[u8]) -> Result<Self, KeyError> {
        let id = id.into();
        if id.is_empty() || id.len() > MAX_KEY_ID_LEN {
            return Err(KeyError::InvalidKeyId(id.len()));
        }
        let key = CipherKey::new(material)?;
        Ok(Self {
            id,
            size: key.size(),
            cipher: Hbe::new(&key),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn size(&self) -> KeySize {
        self.size
    }

    pub(crate) fn cipher(&self) -> &Hbe {
        &self.cipher
    }
}

impl fmt::Debug for SealingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SealingKey")
            .field("id", &self.id)
            .field("size", &self.size)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedPayload {
    pub key_id: String,
    pub nonce: Nonce,
    pub ciphertext: Vec<u8>,
    pub tag: MacTag,
}

/// Tag mismatch, wrong key, or truncation. Deliberately carries no detail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("sealed payload rejected")]
pub struct Reject;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("invalid base64")]
    Base64,
    #[error("sealed payload too short")]
    Truncated,
    #[error("key id is not valid UTF-8")]
    KeyId,
}

pub fn counter_block(nonce: &Nonce, counter: u32) -> [u8; BLOCK_LEN] {
    let mut block = [0u8; BLOCK_LEN];
    block[..NONCE_LEN].copy_from_slice(nonce);
    block[NONCE_LEN..].copy_from_slice(&counter.to_be_bytes());
    block
}

/// One-time MAC key from counter blocks 0 and 1.
pub(crate) fn derive_mac_key(cipher: &Hbe, nonce: &Nonce) -> MacKey {
    MacKey::new(
        cipher.encrypt(counter_block(nonce, 0)),
        cipher.encrypt(counter_block(nonce, 1)),
    )
}

/// XORs the keystream (starting at counter 2) into `data`.
pub fn apply_keystream(cipher: &Hbe, nonce: &Nonce, data: &mut [u8]) {
    for (i, chunk) in data.chunks_mut(BLOCK_LEN).enumerate() {
        let counter = u32::try_from(i + 2).expect("message exceeds counter space");
        let ks = cipher.encrypt(counter_block(nonce, counter));
        for (b, k) in chunk.iter_mut().zip(ks.iter()) {
            *b ^= k;
        }
    }
}

fn authenticated_data(key_id: &str, nonce: &Nonce, aad: &[u8], ciphertext: &[u8]) -> Vec<u8> {
    let mut full_aad = Vec::with_capacity(1 + key_id.len() + aad.len());
    full_aad.push(key_id.len() as u8);
    full_aad.extend_from_slice(key_id.as_bytes());
    full_aad.extend_from_slice(aad);

    let mut msg = Vec::with_capacity(full_aad.len() + NONCE_LEN + ciphertext.len() + 16);
    msg.extend_from_slice(&full_aad);
    msg.extend_from_slice(nonce);
    msg.extend_from_slice(ciphertext);
    msg.extend_from_slice(&(full_aad.len() as u64).to_be_bytes());
    msg.extend_from_slice(&(ciphertext.len() as u64).to_be_bytes());
    msg
}

pub fn random_nonce<R: RngCore + ?Sized>(rng: &mut R) -> Nonce {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    nonce
}

/// The nonce must not have been used with `key` before.
pub fn seal(key: &SealingKey, nonce: Nonce, plaintext: &[u8], aad: &[u8]) -> SealedPayload {
    let mut ciphertext = plaintext.to_vec();
    apply_keystream(key.cipher(), &nonce, &mut ciphertext);
    let mac_key = derive_mac_key(key.cipher(), &nonce);
    let tag = mac_compute(
        &mac_key,
        &authenticated_data(key.id(), &nonce, aad, &ciphertext),
    );
    SealedPayload {
        key_id: key.id().to_owned(),
        nonce,
        ciphertext,
        tag,
    }
}

/// Verifies the tag and only then decrypts.
pub fn open(key: &SealingKey, payload: &SealedPayload, aad: &[u8]) -> Result<Vec<u8>, Reject> {
    if payload.key_id != key.id() {
        return Err(Reject);
    }
    let mac_key = derive_mac_key(key.cipher(), &payload.nonce);
    let msg = authenticated_data(&payload.key_id, &payload.nonce, aad, &payload.ciphertext);
    if !mac_verify(&mac_key, &msg, &payload.tag) {
        return Err(Reject);
    }
    let mut plaintext = payload.ciphertext.clone();
    apply_keystream(key.cipher(), &payload.nonce, &mut plaintext);
    Ok(plaintext)
}

impl SealedPayload {
    /// `key-id-len(1) ‖ key-id ‖ nonce(12) ‖ tag(16) ‖ ciphertext`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out =
            Vec::with_capacity(1 + self.key_id.len() + NONCE_LEN + TAG_LEN + self.ciphertext.len());
        out.push(self.key_id.len() as u8);
        out.extend_from_slice(self.key_id.as_bytes());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(self.tag.as_bytes());
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, WireError> {
        let (&kid_len, rest) = bytes.split_first().ok_or(WireError::Truncated)?;
        let kid_len = kid_len as usize;
        if rest.len() < kid_len + NONCE_LEN + TAG_LEN {
            return Err(WireError::Truncated);
        }
        let (kid, rest) = rest.split_at(kid_len);
        let (nonce, rest) = rest.split_at(NONCE_LEN);
        let (tag, ciphertext) = rest.split_at(TAG_LEN);
        Ok(Self {
            key_id: String::from_utf8(kid.to_vec()).map_err(|_| WireError::KeyId)?,
            nonce: nonce.try_into().expect("split length"),
            tag: MacTag::from_slice(tag).expect("split length"),
            ciphertext: ciphertext.to_vec(),
        })
    }

    pub fn to_wire(&self) -> String {
        STANDARD.encode(self.to_bytes())
    }

    pub fn from_wire(s: &str) -> Result<Self, WireError> {
        let bytes = STANDARD.decode(s.trim()).map_err(|_| WireError::Base64)?;
        Self::from_bytes(&bytes)
    }
}
