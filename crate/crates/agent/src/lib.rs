//! Scripted user agent for the PIN-pad SSO flow.
//!
//! Plays the browser: gates the SP resource, follows the redirect to the
//! IdP, answers the PIN challenge, carries the response back to the SP and
//! fetches the resource. Adversarial steps replay, tamper with or skew
//! those messages. Everything observed comes off the wire.

use std::fmt;
use std::path::Path;

pub mod runner;
pub mod scenario;
pub mod testbed;

pub use runner::{http_client, run_scenario, Endpoints, ScenarioResult};
pub use scenario::{parse_suite, ParseError, Scenario};
pub use testbed::Testbed;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
}

#[derive(Debug, Clone, Default)]
pub struct SuiteSummary {
    pub results: Vec<ScenarioResult>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(ScenarioResult::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            match r.first_failure() {
                None => writeln!(f, "PASS {} ({} steps)", r.name, r.steps.len())?,
                Some(why) => writeln!(f, "FAIL {}: {why}", r.name)?,
            }
        }
        let ok = self.results.iter().filter(|r| r.passed()).count();
        write!(f, "{ok}/{} scenarios passed", self.results.len())
    }
}

fn scenario_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs parsed scenarios, one after another or all at once.
pub async fn run_scenarios(
    scenarios: &[Scenario],
    endpoints: &Endpoints,
    seed: u64,
    parallel: bool,
) -> SuiteSummary {
    let client = http_client();
    let results = if parallel {
        let handles: Vec<_> = scenarios
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, s)| {
                let (ep, client) = (endpoints.clone(), client.clone());
                tokio::spawn(
                    async move { run_scenario(&s, &ep, &client, scenario_seed(seed, i)).await },
                )
            })
            .collect();
        let mut out = Vec::with_capacity(handles.len());
        for h in handles {
            out.push(h.await.expect("scenario task panicked"));
        }
        out
    } else {
        let mut out = Vec::with_capacity(scenarios.len());
        for (i, s) in scenarios.iter().enumerate() {
            out.push(run_scenario(s, endpoints, &client, scenario_seed(seed, i)).await);
        }
        out
    };
    SuiteSummary { results }
}

pub async fn run_suite(
    path: &Path,
    endpoints: &Endpoints,
    seed: u64,
    parallel: bool,
) -> Result<SuiteSummary, SuiteError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: shown.clone(),
        source,
    })?;
    let scenarios = parse_suite(&text).map_err(|source| SuiteError::Parse {
        path: shown,
        source,
    })?;
    Ok(run_scenarios(&scenarios, endpoints, seed, parallel).await)
}
