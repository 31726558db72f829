use std::collections::HashSet;

use hbe_core::kex::SealingKey;
use hbe_core::saml::{
    build_assertion, decode_param, decrypt_validate, encode_param, encrypt_assertion, parse,
    serialize, Assertion, AssertionReject, AuthnRequest, EncryptedAssertion, Message, SsoResponse,
};
use hbe_core::Timestamp;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_assertion(rng: &mut ChaCha8Rng, n: usize) -> Assertion {
    let now = Timestamp(rng.random_range(0..4_000_000_000));
    build_assertion(
        &format!("https://idp{}.example", n % 7),
        &format!("user-{n}<&>"),
        &format!("https://sp{}.example/\"q\"", n % 5),
        now,
        rng.random_range(1..100_000),
        rng,
    )
    .unwrap()
}

#[test]
fn randomized_round_trip_and_injectivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut encodings = HashSet::new();
    for n in 0..100 {
        let a = random_assertion(&mut rng, n);
        let bytes = serialize(&Message::Assertion(a.clone()));
        assert_eq!(parse(&bytes).unwrap(), Message::Assertion(a));
        assert!(encodings.insert(bytes));
    }
}

#[test]
fn tamper_fuzz_rejects_with_bad_tag() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let key = SealingKey::new("fed", &[0x44; 16]).unwrap();
    let mut accepted = 0;
    for n in 0..1000 {
        let a = random_assertion(&mut rng, n);
        let mut ea = encrypt_assertion(&a, &key, &mut rng);
        let bit = rng.random_range(0..ea.sealed.ciphertext.len() * 8);
        ea.sealed.ciphertext[bit / 8] ^= 1 << (bit % 8);
        match decrypt_validate(&ea, &key, a.issue_instant, 30, &a.audience) {
            Ok(_) => accepted += 1,
            Err(reason) => assert_eq!(reason, AssertionReject::BadTag),
        }
    }
    assert_eq!(accepted, 0);
}

#[test]
fn response_through_http_binding() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let key = SealingKey::new("fed", &[0x45; 16]).unwrap();
    let a = random_assertion(&mut rng, 1);
    let resp = SsoResponse {
        in_response_to: "abc".into(),
        issuer: "https://idp.example".into(),
        encrypted_assertion: encrypt_assertion(&a, &key, &mut rng),
    };
    let param = encode_param(&resp.to_xml());
    let Message::Response(back) = decode_param(&param).unwrap() else {
        panic!("expected response");
    };
    assert_eq!(back, resp);
    let opened = decrypt_validate(
        &back.encrypted_assertion,
        &key,
        a.issue_instant,
        0,
        &a.audience,
    )
    .unwrap();
    assert_eq!(opened, a);
}

fn field() -> impl Strategy<Value = String> {
    "[ -~]{0,24}"
}

proptest! {
    #[test]
    fn request_round_trip(id in "[0-9a-f]{32}", sp in field(), acs in field(), t in 0i64..4_000_000_000) {
        let r = AuthnRequest { id, sp_entity_id: sp, acs_url: acs, issue_instant: Timestamp(t) };
        prop_assert_eq!(parse(r.to_xml().as_bytes()).unwrap(), Message::AuthnRequest(r));
    }

    #[test]
    fn assertion_round_trip(issuer in field(), subject in field(), audience in field(),
                            t in 0i64..4_000_000_000, life in 1i64..1_000_000) {
        let a = Assertion {
            id: "0123456789abcdef0123456789abcdef".into(),
            issuer, subject, audience,
            issue_instant: Timestamp(t),
            not_before: Timestamp(t),
            not_on_or_after: Timestamp(t + life),
            authn_method: "PIN-PAD".into(),
        };
        prop_assert_eq!(Assertion::from_xml(a.to_xml().as_bytes()).unwrap(), a);
    }

    #[test]
    fn response_round_trip(irt in "[0-9a-f]{0,32}", issuer in field(), nonce in any::<[u8; 12]>()) {
        let key = SealingKey::new("fed", &[1; 16]).unwrap();
        let sealed = hbe_core::kex::seal(&key, nonce, b"<x/>", b"");
        let r = SsoResponse { in_response_to: irt, issuer, encrypted_assertion: EncryptedAssertion { sealed } };
        prop_assert_eq!(SsoResponse::from_xml(r.to_xml().as_bytes()).unwrap(), r);
    }
}
