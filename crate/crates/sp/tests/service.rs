use std::path::Path;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hbe_core::kex::SealingKey;
use hbe_core::keystore::KeyStore;
use hbe_core::saml::{
    build_assertion, decode_param, encode_param, encrypt_assertion, Message, SsoResponse,
};
use hbe_core::{ManualClock, Timestamp};
use hbe_sp::http::{router, AppState, SESSION_HEADER, TEST_CLOCK_HEADER};
use hbe_sp::{ServiceProvider, SpConfig};

const START: i64 = 1_700_000_000;
const ENTITY: &str = "https://sp.example.test";

fn provider(dir: &Path, seed: u64) -> (ServiceProvider, SealingKey) {
    let mut keys = KeyStore::new();
    keys.generate("fed-sp", 16, &mut ChaCha20Rng::seed_from_u64(2))
        .unwrap();
    std::fs::write(dir.join("keys"), keys.to_file_string()).unwrap();
    std::fs::write(
        dir.join("sp.toml"),
        format!(
            "entity_id = \"{ENTITY}\"\nacs_url = \"{ENTITY}/acs\"\n\
             idp_url = \"http://idp.example.test/sso\"\nfederation_key_id = \"fed-sp\"\n\
             keystore = \"keys\"\nsession_lifetime = 600\n"
        ),
    )
    .unwrap();
    let cfg = SpConfig::load(&dir.join("sp.toml")).unwrap();
    let clock = Arc::new(ManualClock::new(Timestamp(START)));
    let sp = ServiceProvider::new(&cfg, &keys, clock, Some(seed)).unwrap();
    (sp, keys.sealing_key("fed-sp").unwrap())
}

fn respond(
    key: &SealingKey,
    request_id: &str,
    audience: &str,
    now: Timestamp,
    rng: &mut ChaCha20Rng,
) -> SsoResponse {
    let a = build_assertion("https://idp.example.test", "alice", audience, now, 120, rng).unwrap();
    SsoResponse {
        in_response_to: request_id.to_owned(),
        issuer: "https://idp.example.test".into(),
        encrypted_assertion: encrypt_assertion(&a, key, rng),
    }
}

#[test]
fn gate_issues_distinct_decodable_requests() {
    let tmp = tempfile::tempdir().unwrap();
    let (sp, _) = provider(tmp.path(), 1);
    let now = Timestamp(START);
    let a = sp.gate_resource(now);
    let b = sp.gate_resource(now);
    assert_ne!(a.request.id, b.request.id);
    assert_eq!(sp.pending().get(&a.request.id, now).unwrap().issued_at, now);
    let (_, query) = a.location.split_once('?').unwrap();
    let pairs: Vec<(String, String)> = serde_urlencoded::from_str(query).unwrap();
    assert_eq!(pairs[0].0, "SAMLRequest");
    assert_eq!(
        decode_param(&pairs[0].1).unwrap(),
        Message::AuthnRequest(a.request)
    );
}

#[test]
fn consume_checks_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let (sp, key) = provider(tmp.path(), 2);
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let now = Timestamp(START);

    let req = sp.gate_resource(now).request;
    let resp = respond(&key, &req.id, ENTITY, now, &mut rng);
    let session = sp.consume_response(&resp, now).unwrap();
    assert_eq!(session.subject, "alice");
    assert_eq!(session.token.len(), 32);
    assert!(sp
        .serve_resource(&session.token, now)
        .unwrap()
        .contains("alice"));
    assert!(sp.serve_resource(&session.token, now.plus(600)).is_none());

    assert_eq!(
        sp.consume_response(&resp, now).unwrap_err().reason(),
        "replayed"
    );
    // Replayed and expired at once: the window check wins.
    assert_eq!(
        sp.consume_response(&resp, now.plus(200))
            .unwrap_err()
            .reason(),
        "expired"
    );
    // A different assertion for a request that was already answered.
    let again = respond(&key, &req.id, ENTITY, now, &mut rng);
    assert_eq!(
        sp.consume_response(&again, now).unwrap_err().reason(),
        "unknown-request"
    );

    let never = respond(&key, "_never-issued", ENTITY, now, &mut rng);
    assert_eq!(
        sp.consume_response(&never, now).unwrap_err().reason(),
        "unknown-request"
    );

    let req = sp.gate_resource(now).request;
    let other = respond(&key, &req.id, "https://other.test", now, &mut rng);
    assert_eq!(
        sp.consume_response(&other, now).unwrap_err().reason(),
        "wrong-audience"
    );

    let mut tampered = respond(&key, &req.id, ENTITY, now, &mut rng);
    tampered.encrypted_assertion.sealed.ciphertext[5] ^= 0x10;
    assert_eq!(
        sp.consume_response(&tampered, now).unwrap_err().reason(),
        "bad-tag"
    );

    let wrong_key = SealingKey::new("fed-sp", &[7; 16]).unwrap();
    let forged = respond(&wrong_key, &req.id, ENTITY, now, &mut rng);
    assert_eq!(
        sp.consume_response(&forged, now).unwrap_err().reason(),
        "bad-tag"
    );

    let early = respond(&key, &req.id, ENTITY, now.plus(100), &mut rng);
    assert_eq!(
        sp.consume_response(&early, now).unwrap_err().reason(),
        "not-yet-valid"
    );

    // Rejected responses leave the request answerable.
    let ok = respond(&key, &req.id, ENTITY, now, &mut rng);
    sp.consume_response(&ok, now).unwrap();

    let late = sp.gate_resource(now).request;
    let resp = respond(&key, &late.id, ENTITY, now.plus(300), &mut rng);
    assert_eq!(
        sp.consume_response(&resp, now.plus(300))
            .unwrap_err()
            .reason(),
        "unknown-request"
    );
}

#[test]
fn concurrent_replays_admit_one_session() {
    let tmp = tempfile::tempdir().unwrap();
    let (sp, key) = provider(tmp.path(), 4);
    let sp = Arc::new(sp);
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let now = Timestamp(START);
    for round in 0..20 {
        let req = sp.gate_resource(now).request;
        let resp = Arc::new(respond(&key, &req.id, ENTITY, now, &mut rng));
        let barrier = Arc::new(std::sync::Barrier::new(32));
        let handles: Vec<_> = (0..32)
            .map(|_| {
                let (sp, resp, barrier) = (sp.clone(), resp.clone(), barrier.clone());
                std::thread::spawn(move || {
                    barrier.wait();
                    sp.consume_response(&resp, now)
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let accepted = results.iter().filter(|r| r.is_ok()).count();
        assert_eq!(accepted, 1, "round {round}");
        assert!(results
            .iter()
            .filter_map(|r| r.as_ref().err())
            .all(|e| e.reason() == "replayed"));
    }
}

#[test]
fn forged_tokens_never_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let (sp, key) = provider(tmp.path(), 6);
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let now = Timestamp(START);
    let req = sp.gate_resource(now).request;
    sp.consume_response(&respond(&key, &req.id, ENTITY, now, &mut rng), now)
        .unwrap();
    for _ in 0..1000 {
        let mut t = [0u8; 16];
        rng.fill_bytes(&mut t);
        assert!(sp.serve_resource(&hex::encode(t), now).is_none());
    }
}

#[tokio::test]
async fn http_flow() {
    let tmp = tempfile::tempdir().unwrap();
    let (sp, key) = provider(tmp.path(), 8);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let state = AppState {
        sp: Arc::new(sp),
        test_clock: true,
    };
    tokio::spawn(async move { axum::serve(listener, router(state)).await });
    let client = reqwest::Client::builder()
        .redirect(reqwest::redirect::Policy::none())
        .build()
        .unwrap();

    let gate = client.get(format!("{base}/resource")).send().await.unwrap();
    assert_eq!(gate.status(), 302);
    let location = gate.headers()["location"].to_str().unwrap().to_owned();
    assert!(location.starts_with("http://idp.example.test/sso?SAMLRequest="));
    let (_, query) = location.split_once('?').unwrap();
    let pairs: Vec<(String, String)> = serde_urlencoded::from_str(query).unwrap();
    let Message::AuthnRequest(req) = decode_param(&pairs[0].1).unwrap() else {
        panic!("expected a request");
    };

    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let now = Timestamp(START);
    let body = encode_param(&respond(&key, &req.id, ENTITY, now, &mut rng).to_xml());
    let post = |skew: i64| {
        client
            .post(format!("{base}/acs"))
            .header(TEST_CLOCK_HEADER, skew.to_string())
            .form(&[("SAMLResponse", body.as_str())])
            .send()
    };
    let ok = post(0).await.unwrap();
    assert_eq!(ok.status(), 200);
    let token = ok.headers()[SESSION_HEADER].to_str().unwrap().to_owned();
    let replay = post(0).await.unwrap();
    assert_eq!(replay.status(), 403);
    assert_eq!(replay.text().await.unwrap(), "replayed");
    let late = post(200).await.unwrap();
    assert_eq!(late.text().await.unwrap(), "expired");

    let res = client
        .get(format!("{base}/resource"))
        .header(SESSION_HEADER, &token)
        .send()
        .await
        .unwrap();
    assert_eq!(res.status(), 200);
    assert!(res.text().await.unwrap().contains("alice"));
    let res = client
        .get(format!("{base}/resource"))
        .header(SESSION_HEADER, &token)
        .header(TEST_CLOCK_HEADER, "601")
        .send()
        .await
        .unwrap();
    assert_eq!(res.status(), 401);

    let junk = client
        .post(format!("{base}/acs"))
        .form(&[("SAMLResponse", "bm90IHhtbA==")])
        .send()
        .await
        .unwrap();
    assert_eq!(junk.text().await.unwrap(), "malformed");
}
