//! Assertion confidentiality and integrity under a federation key.

use rand::RngCore;

use super::model::{Assertion, EncryptedAssertion};
use crate::kex::{open, random_nonce, seal, SealingKey};
use crate::time::Timestamp;

pub const DEFAULT_CLOCK_SKEW_SECS: i64 = 30;

/// Why an encrypted assertion was refused. Checks run in declaration order
/// and the first failure wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AssertionReject {
    #[error("bad-tag")]
    BadTag,
    #[error("malformed")]
    Malformed,
    #[error("wrong-audience")]
    WrongAudience,
    #[error("expired")]
    Expired,
    #[error("not-yet-valid")]
    NotYetValid,
}

impl AssertionReject {
    pub fn reason(self) -> &'static str {
        match self {
            Self::BadTag => "bad-tag",
            Self::Malformed => "malformed",
            Self::WrongAudience => "wrong-audience",
            Self::Expired => "expired",
            Self::NotYetValid => "not-yet-valid",
        }
    }
}

pub fn encrypt_assertion<R: RngCore + ?Sized>(
    assertion: &Assertion,
    federation_key: &SealingKey,
    rng: &mut R,
) -> EncryptedAssertion {
    EncryptedAssertion {
        sealed: seal(
            federation_key,
            random_nonce(rng),
            assertion.to_xml().as_bytes(),
            b"",
        ),
    }
}

/// Opens, parses and checks audience and the validity window
/// `[not_before - skew, not_on_or_after + skew)`.
pub fn decrypt_validate(
    ea: &EncryptedAssertion,
    federation_key: &SealingKey,
    now: Timestamp,
    skew_secs: i64,
    audience: &str,
) -> Result<Assertion, AssertionReject> {
    let xml = open(federation_key, &ea.sealed, b"").map_err(|_| AssertionReject::BadTag)?;
    let assertion = Assertion::from_xml(&xml).map_err(|_| AssertionReject::Malformed)?;
    if assertion.audience != audience {
        return Err(AssertionReject::WrongAudience);
    }
    if now >= assertion.not_on_or_after.plus(skew_secs) {
        return Err(AssertionReject::Expired);
    }
    if now < assertion.not_before.minus(skew_secs) {
        return Err(AssertionReject::NotYetValid);
    }
    Ok(assertion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saml::build_assertion;
    use rand::SeedableRng;

    const SP: &str = "https://sp.example";

    fn fixture() -> (Assertion, SealingKey, rand::rngs::StdRng) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        let a = build_assertion("idp", "alice", SP, Timestamp(1000), 300, &mut rng).unwrap();
        (a, SealingKey::new("fed-sp", &[0x13; 16]).unwrap(), rng)
    }

    #[test]
    fn honest_round_trip() {
        let (a, key, mut rng) = fixture();
        let ea = encrypt_assertion(&a, &key, &mut rng);
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(1100), 30, SP).unwrap(),
            a
        );
    }

    #[test]
    fn window_boundaries() {
        let (a, key, mut rng) = fixture();
        let ea = encrypt_assertion(&a, &key, &mut rng);
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(1300), 0, SP),
            Err(AssertionReject::Expired)
        );
        assert!(decrypt_validate(&ea, &key, Timestamp(1299), 0, SP).is_ok());
        assert!(decrypt_validate(&ea, &key, Timestamp(1329), 30, SP).is_ok());
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(1330), 30, SP),
            Err(AssertionReject::Expired)
        );
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(999), 0, SP),
            Err(AssertionReject::NotYetValid)
        );
        assert!(decrypt_validate(&ea, &key, Timestamp(970), 30, SP).is_ok());
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(969), 30, SP),
            Err(AssertionReject::NotYetValid)
        );
    }

    #[test]
    fn check_order() {
        let (a, key, mut rng) = fixture();
        let ea = encrypt_assertion(&a, &key, &mut rng);
        // Wrong audience and expired: audience is checked first.
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(99_999), 0, "other"),
            Err(AssertionReject::WrongAudience)
        );
        // Tampered and everything else wrong: tag is checked first.
        let mut bad = ea.clone();
        bad.sealed.ciphertext[0] ^= 1;
        assert_eq!(
            decrypt_validate(&bad, &key, Timestamp(99_999), 0, "other"),
            Err(AssertionReject::BadTag)
        );
    }

    #[test]
    fn authentic_garbage_is_malformed() {
        let (_, key, _) = fixture();
        let ea = EncryptedAssertion {
            sealed: seal(&key, [0; 12], b"<not-closed", b""),
        };
        assert_eq!(
            decrypt_validate(&ea, &key, Timestamp(0), 0, SP),
            Err(AssertionReject::Malformed)
        );
    }
}
