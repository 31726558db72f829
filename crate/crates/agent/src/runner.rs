//! Executes scenarios over HTTP, capturing every exchange.

use std::collections::BTreeMap;
use std::fmt;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use hbe_core::kex::{answer_challenge, derive_long_term_key, unwrap_session_key, SealedPayload};
use hbe_core::saml::{decode_param, encode_param, Message};
use hbe_idp::wire::{ChallengeDocument, SsoGrant, TEST_CLOCK_HEADER};

use crate::scenario::{Expect, Field, Scenario, ScenarioStep, Step};

pub const SESSION_HEADER: &str = "x-session";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoints {
    pub idp: String,
    pub sp: String,
}

impl Endpoints {
    pub fn new(idp: &str, sp: &str) -> Self {
        Self {
            idp: idp.trim_end_matches('/').to_owned(),
            sp: sp.trim_end_matches('/').to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Service {
    Idp,
    Sp,
}

impl fmt::Display for Service {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Idp => "idp",
            Self::Sp => "sp",
        })
    }
}

/// One request/response pair. URLs are recorded without host and port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub line: usize,
    pub method: &'static str,
    pub service: Service,
    pub target: String,
    pub request_headers: Vec<(String, String)>,
    pub request_body: String,
    pub status: u16,
    pub response_headers: Vec<(String, String)>,
    pub response_body: String,
}

impl fmt::Display for Exchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "[line {}] > {} {} {}",
            self.line, self.method, self.service, self.target
        )?;
        for (k, v) in &self.request_headers {
            writeln!(f, "> {k}: {v}")?;
        }
        if !self.request_body.is_empty() {
            writeln!(f, "> {}", self.request_body)?;
        }
        writeln!(f, "< {}", self.status)?;
        for (k, v) in &self.response_headers {
            writeln!(f, "< {k}: {v}")?;
        }
        if !self.response_body.is_empty() {
            writeln!(f, "< {}", self.response_body.trim_end())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub line: usize,
    pub text: String,
    pub expected: Expect,
    pub status: Option<u16>,
    /// Response body of the step's last exchange; for rejects, the reason.
    pub reason: Option<String>,
    pub accepted: Option<usize>,
    pub passed: bool,
    pub note: Option<String>,
}

/// A user the scenario registered, with the long-term key the agent
/// derived for it once a challenge revealed the salt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Credential {
    pub user: String,
    pub pin: String,
    pub ltk: Option<[u8; 16]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioResult {
    pub name: String,
    pub steps: Vec<StepOutcome>,
    pub transcript: Vec<Exchange>,
    pub aborted: Option<String>,
    pub credentials: Vec<Credential>,
}

impl ScenarioResult {
    pub fn passed(&self) -> bool {
        self.aborted.is_none() && self.steps.iter().all(|s| s.passed)
    }

    pub fn transcript_text(&self) -> String {
        self.transcript.iter().map(ToString::to_string).collect()
    }

    pub fn first_failure(&self) -> Option<String> {
        if let Some(a) = &self.aborted {
            return Some(format!("aborted: {a}"));
        }
        self.steps.iter().find(|s| !s.passed).map(|s| {
            let got = match (s.status, s.accepted) {
                (_, Some(n)) => format!("accepted {n}"),
                (Some(code), None) => {
                    format!("{code} {}", s.reason.as_deref().unwrap_or("").trim())
                }
                (None, None) => "nothing".into(),
            };
            let mut msg = format!(
                "line {}: `{}` expected {}, got {}",
                s.line,
                s.text,
                s.expected,
                got.trim()
            );
            if let Some(n) = &s.note {
                msg.push_str(&format!(" ({n})"));
            }
            msg
        })
    }
}

#[derive(Debug, thiserror::Error)]
enum Abort {
    #[error("network: {0}")]
    Network(#[from] reqwest::Error),
    #[error("{0}")]
    Missing(&'static str),
}

pub fn http_client() -> reqwest::Client {
    reqwest::Client::builder()
        .redirect(reqwest::redirect::Policy::none())
        .build()
        .expect("client with static configuration")
}

struct Agent<'a> {
    client: &'a reqwest::Client,
    ep: &'a Endpoints,
    rng: ChaCha20Rng,
    line: usize,
    skew: i64,
    request: Option<String>,
    challenge: Option<ChallengeDocument>,
    response: Option<String>,
    posted: Option<String>,
    session: Option<String>,
    wrong_pin: bool,
    flip_answer: bool,
    registered: BTreeMap<String, Credential>,
    transcript: Vec<Exchange>,
}

struct Reply {
    status: u16,
    body: String,
    location: Option<String>,
    session: Option<String>,
}

fn flip_bit(bytes: &mut [u8], rng: &mut ChaCha20Rng) {
    if bytes.is_empty() {
        return;
    }
    let bit = rng.random_range(0..bytes.len() * 8);
    bytes[bit / 8] ^= 1 << (bit % 8);
}

fn wrong_pin(pin: &str) -> String {
    let mut b = pin.as_bytes().to_vec();
    match b.last_mut() {
        Some(last) if last.is_ascii_digit() => *last = b'0' + (*last - b'0' + 1) % 10,
        Some(last) => *last ^= 1,
        None => b.push(b'0'),
    }
    String::from_utf8_lossy(&b).into_owned()
}

/// Sends one request without recording it.
async fn send(
    client: reqwest::Client,
    url: String,
    headers: Vec<(String, String)>,
    form: Option<String>,
) -> Result<Reply, reqwest::Error> {
    let mut req = match &form {
        Some(body) => client
            .post(url)
            .header("content-type", "application/x-www-form-urlencoded")
            .body(body.clone()),
        None => client.get(url),
    };
    for (k, v) in &headers {
        req = req.header(k.as_str(), v.as_str());
    }
    let resp = req.send().await?;
    let header = |name: &str| {
        resp.headers()
            .get(name)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned)
    };
    let location = header("location");
    let session = header(SESSION_HEADER);
    let status = resp.status().as_u16();
    let body = resp.text().await?;
    Ok(Reply {
        status,
        body,
        location,
        session,
    })
}

impl<'a> Agent<'a> {
    fn new(client: &'a reqwest::Client, ep: &'a Endpoints, seed: u64) -> Self {
        Self {
            client,
            ep,
            rng: ChaCha20Rng::seed_from_u64(seed),
            line: 0,
            skew: 0,
            request: None,
            challenge: None,
            response: None,
            posted: None,
            session: None,
            wrong_pin: false,
            flip_answer: false,
            registered: BTreeMap::new(),
            transcript: Vec::new(),
        }
    }

    fn base(&self, s: Service) -> &str {
        match s {
            Service::Idp => &self.ep.idp,
            Service::Sp => &self.ep.sp,
        }
    }

    fn scrub(&self, url: &str) -> String {
        url.replace(&self.ep.idp, "<idp>")
            .replace(&self.ep.sp, "<sp>")
    }

    fn headers(&self, session: Option<&str>) -> Vec<(String, String)> {
        let mut h = Vec::new();
        if self.skew != 0 {
            h.push((TEST_CLOCK_HEADER.to_owned(), self.skew.to_string()));
        }
        if let Some(s) = session {
            h.push((SESSION_HEADER.to_owned(), s.to_owned()));
        }
        h
    }

    fn record(
        &mut self,
        service: Service,
        target: &str,
        headers: Vec<(String, String)>,
        form: Option<String>,
        reply: &Reply,
    ) {
        let mut response_headers = Vec::new();
        if let Some(l) = &reply.location {
            response_headers.push(("location".to_owned(), self.scrub(l)));
        }
        if let Some(s) = &reply.session {
            response_headers.push((SESSION_HEADER.to_owned(), s.clone()));
        }
        self.transcript.push(Exchange {
            line: self.line,
            method: if form.is_some() { "POST" } else { "GET" },
            service,
            target: target.to_owned(),
            request_headers: headers,
            request_body: form.unwrap_or_default(),
            status: reply.status,
            response_headers,
            response_body: reply.body.clone(),
        });
    }

    async fn exchange(
        &mut self,
        service: Service,
        target: &str,
        form: Option<String>,
        session: Option<&str>,
    ) -> Result<Reply, Abort> {
        let headers = self.headers(session);
        let url = format!("{}{target}", self.base(service));
        let reply = send(self.client.clone(), url, headers.clone(), form.clone()).await?;
        self.record(service, target, headers, form, &reply);
        Ok(reply)
    }

    fn mutate_response(&mut self, field: Field) -> Result<(), Abort> {
        let raw = self
            .response
            .as_deref()
            .ok_or(Abort::Missing("no SSO response captured"))?;
        let Ok(Message::Response(mut r)) = decode_param(raw) else {
            return Err(Abort::Missing("captured SSO response does not parse"));
        };
        let sealed = &mut r.encrypted_assertion.sealed;
        match field {
            Field::Assertion => flip_bit(&mut sealed.ciphertext, &mut self.rng),
            Field::Tag => flip_bit(&mut sealed.tag.0, &mut self.rng),
            Field::Nonce => flip_bit(&mut sealed.nonce, &mut self.rng),
            Field::Answer | Field::Session => unreachable!("handled by caller"),
        }
        self.response = Some(encode_param(&r.to_xml()));
        Ok(())
    }

    /// Runs one step; returns the status-bearing reply for expectation
    /// checks, or `None` for local mutators.
    async fn run(&mut self, s: &ScenarioStep) -> Result<StepOutcome, Abort> {
        self.line = s.line;
        let mut outcome = StepOutcome {
            line: s.line,
            text: s.text.clone(),
            expected: s.expect.clone(),
            status: None,
            reason: None,
            accepted: None,
            passed: true,
            note: None,
        };
        let reply = match &s.step {
            Step::Register { user, pin } => {
                let form = serde_urlencoded::to_string([("user", user), ("pin", pin)])
                    .expect("string pairs");
                let r = self
                    .exchange(Service::Idp, "/register", Some(form), None)
                    .await?;
                if r.status == 201 {
                    self.registered.insert(
                        user.clone(),
                        Credential {
                            user: user.clone(),
                            pin: pin.clone(),
                            ltk: None,
                        },
                    );
                }
                Some(r)
            }
            Step::Gate => {
                let r = self.exchange(Service::Sp, "/resource", None, None).await?;
                if r.status == 302 {
                    let param = r
                        .location
                        .as_deref()
                        .and_then(|l| l.split_once('?'))
                        .and_then(|(_, q)| {
                            serde_urlencoded::from_str::<Vec<(String, String)>>(q).ok()
                        })
                        .and_then(|pairs| pairs.into_iter().find(|(k, _)| k == "SAMLRequest"))
                        .map(|(_, v)| v);
                    if param.is_none() {
                        outcome.passed = false;
                        outcome.note = Some("redirect carries no SAMLRequest".into());
                    }
                    self.request = param;
                }
                Some(r)
            }
            Step::Challenge { user } => {
                let target = format!(
                    "/challenge?{}",
                    serde_urlencoded::to_string([("user", user)]).expect("string pairs")
                );
                let r = self.exchange(Service::Idp, &target, None, None).await?;
                if r.status == 200 {
                    match ChallengeDocument::from_xml(&r.body) {
                        Ok(doc) => {
                            if let Some(c) = self.registered.get_mut(user) {
                                c.ltk = derive_long_term_key(
                                    c.pin.as_bytes(),
                                    &doc.salt,
                                    doc.iterations,
                                )
                                .ok()
                                .map(|k| k.0);
                            }
                            self.challenge = Some(doc);
                        }
                        Err(e) => {
                            outcome.passed = false;
                            outcome.note = Some(e.to_string());
                        }
                    }
                }
                Some(r)
            }
            Step::Solve { user, pin } => {
                let request = self
                    .request
                    .clone()
                    .ok_or(Abort::Missing("no AuthnRequest captured"))?;
                let doc = self
                    .challenge
                    .clone()
                    .ok_or(Abort::Missing("no challenge captured"))?;
                let pin = if std::mem::take(&mut self.wrong_pin) {
                    wrong_pin(pin)
                } else {
                    pin.clone()
                };
                let ltk = derive_long_term_key(pin.as_bytes(), &doc.salt, doc.iterations).ok();
                let mut answer = match &ltk {
                    Some(k) => answer_challenge(k, &doc.challenge()).0,
                    None => [0u8; 16],
                };
                if std::mem::take(&mut self.flip_answer) {
                    flip_bit(&mut answer, &mut self.rng);
                }
                let answer = STANDARD.encode(answer);
                let form = serde_urlencoded::to_string([
                    ("SAMLRequest", request.as_str()),
                    ("user", user.as_str()),
                    ("challenge-id", doc.id.as_str()),
                    ("answer", answer.as_str()),
                ])
                .expect("string pairs");
                let r = self
                    .exchange(Service::Idp, "/sso", Some(form), None)
                    .await?;
                if r.status == 200 {
                    match serde_urlencoded::from_str::<SsoGrant>(&r.body) {
                        Ok(grant) => {
                            let unwrapped = ltk
                                .as_ref()
                                .zip(SealedPayload::from_wire(&grant.session_key).ok())
                                .map(|(k, p)| unwrap_session_key(k, user, &p).is_ok());
                            if unwrapped != Some(true) {
                                outcome.passed = false;
                                outcome.note = Some("session key did not unwrap".into());
                            }
                            self.response = Some(grant.saml_response);
                        }
                        Err(e) => {
                            outcome.passed = false;
                            outcome.note = Some(format!("grant does not parse: {e}"));
                        }
                    }
                }
                Some(r)
            }
            Step::PostResponse | Step::ReplayLastResponse => {
                let body = if s.step == Step::PostResponse {
                    self.response
                        .clone()
                        .ok_or(Abort::Missing("no SSO response captured"))?
                } else {
                    self.posted
                        .clone()
                        .ok_or(Abort::Missing("no response posted yet"))?
                };
                let form =
                    serde_urlencoded::to_string([("SAMLResponse", &body)]).expect("string pairs");
                let r = self.exchange(Service::Sp, "/acs", Some(form), None).await?;
                self.posted = Some(body);
                if let Some(tok) = &r.session {
                    self.session = Some(tok.clone());
                }
                Some(r)
            }
            Step::PostResponseBurst(n) => {
                let body = self
                    .response
                    .clone()
                    .ok_or(Abort::Missing("no SSO response captured"))?;
                let form =
                    serde_urlencoded::to_string([("SAMLResponse", &body)]).expect("string pairs");
                let headers = self.headers(None);
                let url = format!("{}/acs", self.ep.sp);
                let handles: Vec<_> = (0..*n)
                    .map(|_| {
                        tokio::spawn(send(
                            self.client.clone(),
                            url.clone(),
                            headers.clone(),
                            Some(form.clone()),
                        ))
                    })
                    .collect();
                let mut replies = Vec::with_capacity(*n);
                for h in handles {
                    replies.push(h.await.expect("burst task panicked")?);
                }
                // Identical requests: order the record by outcome so the
                // transcript does not depend on scheduling.
                replies.sort_by(|a, b| (a.status, &a.body).cmp(&(b.status, &b.body)));
                for r in &replies {
                    self.record(Service::Sp, "/acs", headers.clone(), Some(form.clone()), r);
                }
                self.posted = Some(body);
                let accepted = replies.iter().filter(|r| r.status == 200).count();
                if let Some(tok) = replies.iter().find_map(|r| r.session.clone()) {
                    self.session = Some(tok);
                }
                outcome.accepted = Some(accepted);
                if let Expect::Accepted(want) = s.expect {
                    outcome.passed &= accepted == want;
                }
                None
            }
            Step::FetchResource => {
                let token = self
                    .session
                    .clone()
                    .ok_or(Abort::Missing("no session captured"))?;
                Some(
                    self.exchange(Service::Sp, "/resource", None, Some(&token))
                        .await?,
                )
            }
            Step::FlipBitIn(Field::Answer) => {
                self.flip_answer = true;
                None
            }
            Step::FlipBitIn(Field::Session) => {
                let token = self
                    .session
                    .as_mut()
                    .ok_or(Abort::Missing("no session captured"))?;
                let i = self.rng.random_range(0..token.len());
                let flipped: String = token
                    .chars()
                    .enumerate()
                    .map(|(j, c)| match (j == i, c.to_digit(16)) {
                        (true, Some(d)) => char::from_digit(d ^ 1, 16).expect("hex digit"),
                        _ => c,
                    })
                    .collect();
                *token = flipped;
                None
            }
            Step::FlipBitIn(field) => {
                self.mutate_response(*field)?;
                None
            }
            Step::UseWrongPin => {
                self.wrong_pin = true;
                None
            }
            Step::SkewClock(secs) => {
                self.skew = *secs;
                None
            }
            Step::ForgeRequestSp(entity) => {
                let raw = self
                    .request
                    .as_deref()
                    .ok_or(Abort::Missing("no AuthnRequest captured"))?;
                let Ok(Message::AuthnRequest(mut r)) = decode_param(raw) else {
                    return Err(Abort::Missing("captured AuthnRequest does not parse"));
                };
                r.sp_entity_id = entity.clone();
                self.request = Some(encode_param(&r.to_xml()));
                None
            }
        };
        if let Some(r) = reply {
            outcome.status = Some(r.status);
            outcome.reason = Some(r.body.trim().to_owned());
            if let Expect::Status { code, text } = &s.expect {
                outcome.passed &=
                    r.status == *code && text.as_deref().is_none_or(|t| r.body.contains(t));
            }
        }
        Ok(outcome)
    }
}

/// Runs the steps in order. A network failure or a missing artifact stops
/// the scenario and names the step.
pub async fn run_scenario(
    scenario: &Scenario,
    endpoints: &Endpoints,
    client: &reqwest::Client,
    seed: u64,
) -> ScenarioResult {
    let mut agent = Agent::new(client, endpoints, seed);
    let mut steps = Vec::with_capacity(scenario.steps.len());
    let mut aborted = None;
    for s in &scenario.steps {
        match agent.run(s).await {
            Ok(o) => steps.push(o),
            Err(e) => {
                aborted = Some(format!("line {}: `{}`: {e}", s.line, s.text));
                break;
            }
        }
    }
    ScenarioResult {
        name: scenario.name.clone(),
        steps,
        transcript: agent.transcript,
        aborted,
        credentials: agent.registered.into_values().collect(),
    }
}
