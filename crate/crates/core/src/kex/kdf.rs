//! PIN-to-key derivation using the block cipher as a one-way compression
//! step: `X0 = salt`, `X(i+1) = E_pin(Xi) ⊕ Xi`.

use std::fmt;

use crate::cipher::{CipherKey, Hbe};

pub const SALT_LEN: usize = 16;
pub const MAX_PIN_LEN: usize = 16;
pub const DEFAULT_ITERATIONS: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KdfError {
    #[error("PIN must not be empty")]
    EmptyPin,
    #[error("PIN longer than {MAX_PIN_LEN} octets")]
    PinTooLong,
    #[error("iteration count must be at least 1")]
    ZeroIterations,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct LongTermKey(pub [u8; 16]);

impl LongTermKey {
    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Debug for LongTermKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LongTermKey(..)")
    }
}

/// PIN followed by 0x80 and zeros; a 16-octet PIN is used as is.
pub fn pad_pin(pin: &[u8]) -> Result<[u8; 16], KdfError> {
    if pin.is_empty() {
        return Err(KdfError::EmptyPin);
    }
    if pin.len() > MAX_PIN_LEN {
        return Err(KdfError::PinTooLong);
    }
    let mut padded = [0u8; 16];
    padded[..pin.len()].copy_from_slice(pin);
    if pin.len() < 16 {
        padded[pin.len()] = 0x80;
    }
    Ok(padded)
}

pub fn derive_long_term_key(
    pin: &[u8],
    salt: &[u8; SALT_LEN],
    iterations: u32,
) -> Result<LongTermKey, KdfError> {
    if iterations == 0 {
        return Err(KdfError::ZeroIterations);
    }
    let padded = pad_pin(pin)?;
    let cipher = Hbe::new(&CipherKey::new(&padded).expect("16-octet key"));
    let mut x = *salt;
    for _ in 0..iterations {
        let e = cipher.encrypt(x);
        for (xi, ei) in x.iter_mut().zip(e) {
            *xi ^= ei;
        }
    }
    Ok(LongTermKey(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let salt = [7u8; 16];
        assert_eq!(
            derive_long_term_key(b"1234", &salt, 50).unwrap(),
            derive_long_term_key(b"1234", &salt, 50).unwrap()
        );
    }

    #[test]
    fn single_iteration_is_one_cipher_call() {
        let salt: [u8; 16] = core::array::from_fn(|i| i as u8 * 3);
        let padded = pad_pin(b"2468").unwrap();
        let e = Hbe::new(&CipherKey::new(&padded).unwrap()).encrypt(salt);
        let expected: [u8; 16] = core::array::from_fn(|i| e[i] ^ salt[i]);
        assert_eq!(derive_long_term_key(b"2468", &salt, 1).unwrap().0, expected);
    }

    #[test]
    fn padding() {
        let p = pad_pin(b"12").unwrap();
        assert_eq!(&p[..3], b"12\x80");
        assert!(p[3..].iter().all(|&b| b == 0));
        assert_eq!(pad_pin(&[b'9'; 16]).unwrap(), [b'9'; 16]);
    }

    #[test]
    fn rejects_bad_input() {
        let salt = [0u8; 16];
        assert_eq!(derive_long_term_key(b"", &salt, 1), Err(KdfError::EmptyPin));
        assert_eq!(
            derive_long_term_key(&[1; 17], &salt, 1),
            Err(KdfError::PinTooLong)
        );
        assert_eq!(
            derive_long_term_key(b"1", &salt, 0),
            Err(KdfError::ZeroIterations)
        );
    }
}
