//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! scenario happy-path
//!   register alice 739152      => 201
//!   gate                       => 302
//!   challenge alice            => 200
//!   solve alice 739152         => 200
//!   post-response              => 200
//!   fetch-resource             => 200 alice
//! end
//! ```
//!
//! `=> STATUS [TEXT]` expects the status and, when given, that the body
//! contains TEXT. `=> accepted N` applies to bursts. Steps that send
//! nothing (mutators) take no expectation.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Ciphertext of the encrypted assertion in the captured response.
    Assertion,
    /// Tag of the encrypted assertion.
    Tag,
    /// Nonce of the encrypted assertion.
    Nonce,
    /// The next challenge answer sent to the IdP.
    Answer,
    /// The captured session token.
    Session,
}

impl Field {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "assertion" => Self::Assertion,
            "tag" => Self::Tag,
            "nonce" => Self::Nonce,
            "answer" => Self::Answer,
            "session" => Self::Session,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Register { user: String, pin: String },
    Gate,
    Challenge { user: String },
    Solve { user: String, pin: String },
    PostResponse,
    FetchResource,
    ReplayLastResponse,
    PostResponseBurst(usize),
    FlipBitIn(Field),
    UseWrongPin,
    SkewClock(i64),
    ForgeRequestSp(String),
}

impl Step {
    /// Whether the step puts a message on the wire.
    pub fn is_exchange(&self) -> bool {
        !matches!(
            self,
            Self::FlipBitIn(_) | Self::UseWrongPin | Self::SkewClock(_) | Self::ForgeRequestSp(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expect {
    Any,
    Status { code: u16, text: Option<String> },
    Accepted(usize),
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Any => f.write_str("any"),
            Self::Status { code, text: None } => write!(f, "{code}"),
            Self::Status {
                code,
                text: Some(t),
            } => write!(f, "{code} {t}"),
            Self::Accepted(n) => write!(f, "accepted {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioStep {
    pub line: usize,
    pub text: String,
    pub step: Step,
    pub expect: Expect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub line: usize,
    pub steps: Vec<ScenarioStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

fn parse_step(line: usize, words: &[&str]) -> Result<Step, ParseError> {
    let argc = |n: usize| {
        if words.len() == n + 1 {
            Ok(())
        } else {
            err(line, format!("`{}` takes {n} argument(s)", words[0]))
        }
    };
    let number = |s: &str| {
        s.parse::<i64>()
            .or_else(|_| err(line, format!("not a number: {s}")))
    };
    Ok(match words[0] {
        "register" => {
            argc(2)?;
            Step::Register {
                user: words[1].into(),
                pin: words[2].into(),
            }
        }
        "gate" => {
            argc(0)?;
            Step::Gate
        }
        "challenge" => {
            argc(1)?;
            Step::Challenge {
                user: words[1].into(),
            }
        }
        "solve" => {
            argc(2)?;
            Step::Solve {
                user: words[1].into(),
                pin: words[2].into(),
            }
        }
        "post-response" => {
            argc(0)?;
            Step::PostResponse
        }
        "fetch-resource" => {
            argc(0)?;
            Step::FetchResource
        }
        "replay-last-response" => {
            argc(0)?;
            Step::ReplayLastResponse
        }
        "post-response-burst" => {
            argc(1)?;
            let n = number(words[1])?;
            if !(1..=1024).contains(&n) {
                return err(line, "burst size must be 1..=1024");
            }
            Step::PostResponseBurst(n as usize)
        }
        "flip-bit-in" => {
            argc(1)?;
            match Field::parse(words[1]) {
                Some(f) => Step::FlipBitIn(f),
                None => return err(line, format!("unknown field `{}`", words[1])),
            }
        }
        "use-wrong-pin" => {
            argc(0)?;
            Step::UseWrongPin
        }
        "skew-clock" => {
            argc(1)?;
            Step::SkewClock(number(words[1])?)
        }
        "forge-request-sp" => {
            argc(1)?;
            Step::ForgeRequestSp(words[1].into())
        }
        other => return err(line, format!("unknown step `{other}`")),
    })
}

fn parse_expect(line: usize, s: &str) -> Result<Expect, ParseError> {
    let mut words = s.split_whitespace();
    match words.next() {
        None => err(line, "empty expectation after `=>`"),
        Some("accepted") => match words.next().map(str::parse::<usize>) {
            Some(Ok(n)) if words.next().is_none() => Ok(Expect::Accepted(n)),
            _ => err(line, "`accepted` takes one count"),
        },
        Some(code) => {
            let code: u16 = code
                .parse()
                .ok()
                .filter(|c| (100..600).contains(c))
                .map_or_else(|| err(line, format!("bad status `{code}`")), Ok)?;
            let rest: Vec<&str> = words.collect();
            Ok(Expect::Status {
                code,
                text: (!rest.is_empty()).then(|| rest.join(" ")),
            })
        }
    }
}

/// What a step needs captured before it can run.
#[derive(Default)]
struct Captured {
    request: bool,
    challenge: bool,
    response: bool,
    posted: bool,
    session: bool,
}

fn check_artifacts(line: usize, step: &Step, have: &mut Captured) -> Result<(), ParseError> {
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            err(line, format!("needs {what} captured by an earlier step"))
        }
    };
    match step {
        Step::Gate => have.request = true,
        Step::Challenge { .. } => have.challenge = true,
        Step::ForgeRequestSp(_) => need(have.request, "an AuthnRequest (gate)")?,
        Step::Solve { .. } => {
            need(have.request, "an AuthnRequest (gate)")?;
            need(have.challenge, "a challenge")?;
            have.response = true;
        }
        Step::PostResponse | Step::PostResponseBurst(_) => {
            need(have.response, "an SSO response (solve)")?;
            have.posted = true;
            have.session = true;
        }
        Step::ReplayLastResponse => need(have.posted, "a posted response")?,
        Step::FetchResource => need(have.session, "a session (post-response)")?,
        Step::FlipBitIn(Field::Session) => need(have.session, "a session")?,
        Step::FlipBitIn(Field::Answer) => {}
        Step::FlipBitIn(_) => need(have.response, "an SSO response (solve)")?,
        Step::Register { .. } | Step::UseWrongPin | Step::SkewClock(_) => {}
    }
    Ok(())
}

pub fn parse_suite(text: &str) -> Result<Vec<Scenario>, ParseError> {
    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut current: Option<(Scenario, Captured)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (body, expect) = match content.split_once("=>") {
            Some((b, e)) => (b.trim(), Some(e.trim())),
            None => (content, None),
        };
        let words: Vec<&str> = body.split_whitespace().collect();
        if words.is_empty() {
            return err(line, "expectation without a step");
        }
        match (words[0], current.as_mut()) {
            ("scenario", None) => {
                if words.len() != 2 || expect.is_some() {
                    return err(line, "expected `scenario <name>`");
                }
                if scenarios.iter().any(|s| s.name == words[1]) {
                    return err(line, format!("duplicate scenario name `{}`", words[1]));
                }
                current = Some((
                    Scenario {
                        name: words[1].into(),
                        line,
                        steps: Vec::new(),
                    },
                    Captured::default(),
                ));
            }
            ("scenario", Some(_)) => return err(line, "nested `scenario`; missing `end`?"),
            ("end", Some(_)) => {
                if words.len() != 1 || expect.is_some() {
                    return err(line, "`end` takes no arguments");
                }
                scenarios.push(current.take().expect("matched Some").0);
            }
            ("end", None) => return err(line, "`end` outside a scenario"),
            (_, None) => return err(line, "step outside a scenario"),
            (_, Some((scenario, have))) => {
                let step = parse_step(line, &words)?;
                check_artifacts(line, &step, have)?;
                let expect = match expect {
                    None => Expect::Any,
                    Some(_) if !step.is_exchange() => {
                        return err(line, "mutator steps take no expectation")
                    }
                    Some(e) => parse_expect(line, e)?,
                };
                match (&step, &expect) {
                    (Step::PostResponseBurst(_), Expect::Status { .. }) => {
                        return err(line, "bursts expect `accepted N`")
                    }
                    (s, Expect::Accepted(_)) if !matches!(s, Step::PostResponseBurst(_)) => {
                        return err(line, "`accepted N` only applies to bursts")
                    }
                    _ => {}
                }
                scenario.steps.push(ScenarioStep {
                    line,
                    text: body.to_owned(),
                    step,
                    expect,
                });
            }
        }
    }
    if let Some((s, _)) = current {
        return err(s.line, format!("scenario `{}` has no `end`", s.name));
    }
    Ok(scenarios)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps_and_expectations() {
        let suite = parse_suite(
            "# top\n\nscenario a\n register u 1234 => 201\n gate => 302\n challenge u\n\
             solve u 1234 => 403 reject-auth  # trailing\n post-response-burst 4 => accepted 1\n\
             skew-clock -20\nend\n",
        )
        .unwrap();
        assert_eq!(suite.len(), 1);
        let s = &suite[0].steps;
        assert_eq!(s.len(), 6);
        assert_eq!(s[0].line, 4);
        assert_eq!(
            s[3].expect,
            Expect::Status {
                code: 403,
                text: Some("reject-auth".into())
            }
        );
        assert_eq!(s[2].expect, Expect::Any);
        assert_eq!(s[4].step, Step::PostResponseBurst(4));
        assert_eq!(s[5].step, Step::SkewClock(-20));
    }

    #[test]
    fn empty_suite() {
        assert_eq!(parse_suite("").unwrap(), vec![]);
        assert_eq!(parse_suite("# nothing\n").unwrap(), vec![]);
    }

    #[test]
    fn errors_name_lines() {
        let cases = [
            ("scenario a\n bogus\nend\n", 2),
            ("gate\n", 1),
            ("scenario a\n gate\n", 1),
            ("scenario a\n\n post-response => 200\nend\n", 3),
            ("scenario a\n gate\n skew-clock 5 => 200\nend\n", 3),
            ("scenario a\n register u\nend\n", 2),
            ("scenario a\n gate => 999\nend\n", 2),
            ("scenario a\n gate => accepted 1\nend\n", 2),
            ("scenario a\nend\nscenario a\nend\n", 3),
            ("scenario a\n flip-bit-in elbow\nend\n", 2),
            ("end\n", 1),
        ];
        for (text, line) in cases {
            let e = parse_suite(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
            assert!(e.to_string().starts_with(&format!("line {line}:")));
        }
    }
}
