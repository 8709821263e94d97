//! Evaluator sessions against a pluggable backend: an HTTP chat-completion
//! client for real runs, and a deterministic mock for offline and test use.
//!
//! Every evaluation attempt is a fresh session; no conversational state is
//! ever shared between calls, including retries.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use serde_json::json;
use thiserror::Error;

use crate::catalog::{build_instructions, heuristic_catalog};
use crate::corpus::{CorpusBundle, EvaluationPayload, IngestConfig, PayloadLimits};
use crate::corpus::{filter_frontend, package_payload};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("all {attempts} attempts failed for session {session_index}: {last_error}")]
    TransportExhausted {
        session_index: u32,
        attempts: u32,
        last_error: String,
    },
    #[error("backend returned an empty response (refusal) for session {session_index}")]
    BackendRefusal { session_index: u32 },
    #[error("run_site needs at least 2 sessions, got {0}")]
    TooFewSessions(u32),
    #[error("http backend misconfigured: {0}")]
    Configuration(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout: Duration,
    pub session_index: u32,
    /// Base delay for exponential backoff between attempts.
    pub backoff_base: Duration,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            model_name: "gpt-4o".to_string(),
            temperature: 0.0,
            max_retries: 3,
            timeout: Duration::from_secs(120),
            session_index: 1,
            backoff_base: Duration::from_millis(500),
        }
    }
}

/// Verbatim backend output plus transport bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendResponse {
    pub raw_text: String,
    pub transport_metadata: std::collections::BTreeMap<String, String>,
}

/// A source of evaluation text. Implementations must be safe for concurrent
/// submissions; each `submit` call is an independent session.
pub trait EvaluatorBackend: Send + Sync {
    fn submit(
        &self,
        instructions: &str,
        payload: &EvaluationPayload,
        config: &SessionConfig,
    ) -> Result<String, String>;

    fn name(&self) -> &'static str;
}

/// Submit the payload in a fresh session, retrying transport failures with
/// exponential backoff. Retries never reuse a session.
pub fn evaluate_session(
    payload: &EvaluationPayload,
    backend: &dyn EvaluatorBackend,
    config: &SessionConfig,
) -> Result<BackendResponse, ClientError> {
    let instructions = build_instructions();
    let mut last_error = String::new();
    let attempts = config.max_retries.max(1);
    for attempt in 1..=attempts {
        if attempt > 1 {
            let delay = config.backoff_base * 2u32.saturating_pow(attempt - 2);
            std::thread::sleep(delay);
        }
        match backend.submit(instructions, payload, config) {
            Ok(text) => {
                if text.trim().is_empty() {
                    return Err(ClientError::BackendRefusal {
                        session_index: config.session_index,
                    });
                }
                let mut metadata = std::collections::BTreeMap::new();
                metadata.insert("attempts".to_string(), attempt.to_string());
                metadata.insert("backend".to_string(), backend.name().to_string());
                metadata.insert("status".to_string(), "ok".to_string());
                return Ok(BackendResponse {
                    raw_text: text,
                    transport_metadata: metadata,
                });
            }
            Err(err) => last_error = err,
        }
    }
    Err(ClientError::TransportExhausted {
        session_index: config.session_index,
        attempts,
        last_error,
    })
}

/// Outcome of running all sessions for one site. Partial failures are
/// preserved with session attribution rather than aborting the site.
#[derive(Debug)]
pub struct SiteRunOutcome {
    pub site_id: String,
    pub responses: Vec<(u32, BackendResponse)>,
    pub failures: Vec<(u32, ClientError)>,
}

/// Run `n_sessions` independent evaluator sessions over a site bundle.
/// Sessions execute concurrently up to `parallel`; output is ordered by
/// session index.
pub fn run_site(
    site: &CorpusBundle,
    backend: &dyn EvaluatorBackend,
    n_sessions: u32,
    base_config: &SessionConfig,
    limits: &PayloadLimits,
    parallel: usize,
) -> Result<SiteRunOutcome, ClientError> {
    if n_sessions < 2 {
        return Err(ClientError::TooFewSessions(n_sessions));
    }
    let filtered = filter_frontend(site, &IngestConfig::default());
    let payload = package_payload(&filtered, limits)?;

    let mut responses = Vec::new();
    let mut failures = Vec::new();
    let parallel = parallel.max(1);
    let indices: Vec<u32> = (1..=n_sessions).collect();
    for wave in indices.chunks(parallel) {
        let results: Vec<(u32, Result<BackendResponse, ClientError>)> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|&idx| {
                        let payload = &payload;
                        let config = SessionConfig {
                            session_index: idx,
                            ..base_config.clone()
                        };
                        scope.spawn(move || (idx, evaluate_session(payload, backend, &config)))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("session thread")).collect()
            });
        for (idx, result) in results {
            match result {
                Ok(response) => responses.push((idx, response)),
                Err(err) => failures.push((idx, err)),
            }
        }
    }
    responses.sort_by_key(|(idx, _)| *idx);
    failures.sort_by_key(|(idx, _)| *idx);
    Ok(SiteRunOutcome {
        site_id: site.site_id.clone(),
        responses,
        failures,
    })
}

// ---------------------------------------------------------------------------
// Deterministic mock backend
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultMode {
    None,
    MalformedSeverity,
    DuplicateHeuristic,
    ProseWrapper,
    NonJson,
}

/// Deterministic backend: output is a pure function of
/// (seed, site_id, session_index). Fault modes reproduce observed LLM
/// failure classes for schema robustness testing.
pub struct MockBackend {
    seed: u64,
    fault_mode: FaultMode,
    /// (site_id, session_index, heuristic position) slots whose severity is
    /// replaced with a malformed value. Used for dataset-level fault
    /// injection with exact counts.
    malform_slots: BTreeSet<(String, u32, usize)>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn mix_str(mut state: u64, s: &str) -> u64 {
    for b in s.bytes() {
        state = splitmix64(state ^ u64::from(b));
    }
    state
}

impl MockBackend {
    pub fn new(seed: u64, fault_mode: FaultMode) -> Self {
        Self {
            seed,
            fault_mode,
            malform_slots: BTreeSet::new(),
        }
    }

    pub fn with_malform_slots(mut self, slots: BTreeSet<(String, u32, usize)>) -> Self {
        self.malform_slots = slots;
        self
    }

    fn severity_for(&self, site_id: &str, session_index: u32, heuristic_pos: usize) -> u8 {
        let mut state = splitmix64(self.seed);
        state = mix_str(state, site_id);
        state = splitmix64(state ^ u64::from(session_index));
        state = splitmix64(state ^ heuristic_pos as u64);
        // skewed toward minor issues, catastrophes rare
        match state % 100 {
            0..=17 => 0,
            18..=45 => 1,
            46..=79 => 2,
            80..=96 => 3,
            _ => 4,
        }
    }

    fn entry_json(&self, site_id: &str, session_index: u32, pos: usize) -> serde_json::Value {
        let heuristic = &heuristic_catalog()[pos];
        let severity = self.severity_for(site_id, session_index, pos);
        let issue_found = severity > 0;
        let severity_value: serde_json::Value =
            if self.malform_slots.contains(&(site_id.to_string(), session_index, pos)) {
                json!("high")
            } else {
                json!(severity)
            };
        json!({
            "Heuristic": heuristic.canonical_name,
            "SeverityRating": severity_value,
            "IssueFound": issue_found,
            "IssueDescription": if issue_found {
                format!("Synthetic issue for {} (severity {severity}).", heuristic.canonical_name)
            } else {
                "No issue found.".to_string()
            },
            "CodeReference": format!("index.html: Line {}", 10 + pos * 7),
            "CodeSnippet": "<div>...</div>",
            "EvaluationAnswers": { "basis": "deterministic mock evaluation" },
            "Recommendation": if issue_found {
                "Address the flagged pattern.".to_string()
            } else {
                "None.".to_string()
            },
        })
    }
}

impl EvaluatorBackend for MockBackend {
    fn submit(
        &self,
        _instructions: &str,
        payload: &EvaluationPayload,
        config: &SessionConfig,
    ) -> Result<String, String> {
        let site_id = payload.site_id.as_str();
        let mut entries: Vec<serde_json::Value> = (0..10)
            .map(|pos| self.entry_json(site_id, config.session_index, pos))
            .collect();
        match self.fault_mode {
            FaultMode::None => {}
            FaultMode::MalformedSeverity => {
                entries[0]["SeverityRating"] = json!("high");
            }
            FaultMode::DuplicateHeuristic => {
                let dup = entries[0].clone();
                entries.push(dup);
            }
            FaultMode::ProseWrapper => {
                let body = serde_json::to_string_pretty(&entries).expect("serialize entries");
                return Ok(format!(
                    "Here is the heuristic evaluation you requested:\n```json\n{body}\n```\nLet me know if you need anything else."
                ));
            }
            FaultMode::NonJson => {
                return Ok(
                    "I'm sorry, I cannot complete a heuristic evaluation for this upload."
                        .to_string(),
                );
            }
        }
        Ok(serde_json::to_string_pretty(&entries).expect("serialize entries"))
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

// ---------------------------------------------------------------------------
// HTTP chat-completion backend
// ---------------------------------------------------------------------------

/// Chat-completion client. The bearer credential comes from configuration;
/// requests and verbatim responses can be appended to an audit log.
pub struct HttpBackend {
    base_url: String,
    api_key: String,
    client: reqwest::blocking::Client,
    audit_log: Option<Mutex<std::fs::File>>,
}

impl HttpBackend {
    pub fn new(
        base_url: String,
        api_key: String,
        timeout: Duration,
        audit_log_path: Option<PathBuf>,
    ) -> Result<Self, ClientError> {
        if api_key.trim().is_empty() {
            return Err(ClientError::Configuration(
                "missing API credential (set HEURIKAPPA_API_KEY)".to_string(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ClientError::Configuration(e.to_string()))?;
        let audit_log = match audit_log_path {
            Some(path) => Some(Mutex::new(
                std::fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&path)
                    .map_err(|e| ClientError::Configuration(format!("audit log {path:?}: {e}")))?,
            )),
            None => None,
        };
        Ok(Self {
            base_url,
            api_key,
            client,
            audit_log,
        })
    }

    fn audit(&self, record: &serde_json::Value) {
        if let Some(log) = &self.audit_log {
            if let Ok(mut file) = log.lock() {
                let _ = writeln!(file, "{record}");
            }
        }
    }
}

impl EvaluatorBackend for HttpBackend {
    fn submit(
        &self,
        instructions: &str,
        payload: &EvaluationPayload,
        config: &SessionConfig,
    ) -> Result<String, String> {
        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let body = json!({
            "model": config.model_name,
            "temperature": config.temperature,
            "messages": [
                { "role": "system", "content": instructions },
                { "role": "user", "content": payload.text },
            ],
        });
        self.audit(&json!({
            "event": "request",
            "site_id": payload.site_id,
            "session_index": config.session_index,
            "model": config.model_name,
        }));
        let response = self
            .client
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| format!("transport: {e}"))?;
        let status = response.status();
        let text = response.text().map_err(|e| format!("read body: {e}"))?;
        if !status.is_success() {
            return Err(format!("http status {status}: {text}"));
        }
        let parsed: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("response not JSON: {e}"))?;
        let content = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| "response missing choices[0].message.content".to_string())?
            .to_string();
        self.audit(&json!({
            "event": "response",
            "site_id": payload.site_id,
            "session_index": config.session_index,
            "status": status.as_u16(),
            "content": content,
        }));
        Ok(content)
    }

    fn name(&self) -> &'static str {
        "http"
    }
}
