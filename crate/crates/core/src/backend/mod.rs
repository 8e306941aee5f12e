//! Translation backends and batch dispatch.
//!
//! Predictions are stored as JSONL, one object per line:
//! `{"id", "hypothesis", "backend", "latency_ms", "attempts", "failed"?, "error"?, "raw"?}`.

mod http;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use http::{clean_response, ChatBackend};

use crate::jsonl::{self, JsonlError};
use crate::prompt::extract_sentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpChat,
    ReplayFile,
    StubEcho,
    StubFixed,
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub timeout: Duration,
    pub max_retries: u32,
    pub retry_base_delay: Duration,
    pub retry_max_delay: Duration,
    pub max_in_flight: usize,
    pub replay_path: Option<PathBuf>,
    pub fixed_text: Option<String>,
}

impl BackendConfig {
    pub fn new(kind: BackendKind) -> Self {
        BackendConfig {
            kind,
            endpoint: None,
            token_env: None,
            model: String::new(),
            temperature: 0.0,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            retry_base_delay: Duration::from_millis(500),
            retry_max_delay: Duration::from_secs(30),
            max_in_flight: 4,
            replay_path: None,
            fixed_text: None,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |m: &str| Err(BackendError::Config(m.to_owned()));
        if self.max_in_flight == 0 {
            return bad("max in-flight must be at least 1");
        }
        if self.timeout.is_zero() {
            return bad("timeout must be positive");
        }
        match self.kind {
            BackendKind::HttpChat => {
                if self.endpoint.as_deref().is_none_or(str::is_empty) {
                    return bad("http_chat requires an endpoint");
                }
                if self.token_env.as_deref().is_none_or(str::is_empty) {
                    return bad("http_chat requires a token environment variable name");
                }
            }
            BackendKind::ReplayFile if self.replay_path.is_none() => {
                return bad("replay_file requires a predictions file");
            }
            BackendKind::StubFixed if self.fixed_text.is_none() => {
                return bad("stub_fixed requires a fixed text");
            }
            _ => {}
        }
        Ok(())
    }
}

/// One prompt to translate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRequest {
    pub id: String,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(rename = "id")]
    pub instance_id: String,
    pub hypothesis: String,
    #[serde(rename = "backend")]
    pub backend_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Response body before cleanup, when it differs from the hypothesis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("duplicate request id `{0}`")]
    DuplicateId(String),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// What a backend produced for one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub result: Result<String, String>,
    pub raw: Option<String>,
    pub attempts: u32,
    /// Recorded latency to report instead of the measured one (replay).
    pub latency_ms: Option<u64>,
}

impl Outcome {
    fn ok(hypothesis: String) -> Self {
        Outcome {
            result: Ok(hypothesis),
            raw: None,
            attempts: 1,
            latency_ms: None,
        }
    }
}

pub trait Backend: Sync {
    fn id(&self) -> String;
    fn translate(&self, request: &TranslationRequest) -> Outcome;
}

/// Returns the sentence embedded in the prompt.
pub struct EchoBackend;

impl Backend for EchoBackend {
    fn id(&self) -> String {
        "stub_echo".into()
    }
    fn translate(&self, request: &TranslationRequest) -> Outcome {
        Outcome::ok(extract_sentence(&request.prompt).to_owned())
    }
}

pub struct FixedBackend(pub String);

impl Backend for FixedBackend {
    fn id(&self) -> String {
        "stub_fixed".into()
    }
    fn translate(&self, _request: &TranslationRequest) -> Outcome {
        Outcome::ok(self.0.clone())
    }
}

/// Answers from a predictions file; ids absent from the file fail.
pub struct ReplayBackend {
    id: String,
    recorded: HashMap<String, Prediction>,
}

impl ReplayBackend {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, BackendError> {
        let path = path.as_ref();
        let preds = load_predictions(path)?;
        let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        Ok(Self::from_predictions(format!("replay:{stem}"), preds))
    }

    pub fn from_predictions(id: String, preds: Vec<Prediction>) -> Self {
        ReplayBackend {
            id,
            recorded: preds.into_iter().map(|p| (p.instance_id.clone(), p)).collect(),
        }
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> String {
        self.id.clone()
    }
    fn translate(&self, request: &TranslationRequest) -> Outcome {
        match self.recorded.get(&request.id) {
            Some(p) if !p.failed => Outcome {
                result: Ok(p.hypothesis.clone()),
                raw: None,
                attempts: 1,
                latency_ms: Some(p.latency_ms),
            },
            Some(p) => Outcome {
                result: Err(p.error.clone().unwrap_or_else(|| "recorded failure".into())),
                raw: None,
                attempts: 1,
                latency_ms: Some(p.latency_ms),
            },
            None => Outcome {
                result: Err(format!("no recorded prediction for `{}`", request.id)),
                raw: None,
                attempts: 1,
                latency_ms: Some(0),
            },
        }
    }
}

pub fn build_backend(config: &BackendConfig) -> Result<Box<dyn Backend>, BackendError> {
    config.validate()?;
    Ok(match config.kind {
        BackendKind::HttpChat => Box::new(ChatBackend::new(config)?),
        BackendKind::ReplayFile => Box::new(ReplayBackend::open(config.replay_path.as_ref().expect("validated"))?),
        BackendKind::StubEcho => Box::new(EchoBackend),
        BackendKind::StubFixed => Box::new(FixedBackend(config.fixed_text.clone().expect("validated"))),
    })
}

/// Translates every request with the configured backend.
pub fn translate_batch(requests: &[TranslationRequest], config: &BackendConfig) -> Result<Vec<Prediction>, BackendError> {
    let backend = build_backend(config)?;
    dispatch(requests, backend.as_ref(), config.max_in_flight)
}

/// Runs requests on up to `max_in_flight` threads. Output order follows input
/// order; failures become predictions with `failed` set.
pub fn dispatch(requests: &[TranslationRequest], backend: &dyn Backend, max_in_flight: usize) -> Result<Vec<Prediction>, BackendError> {
    if max_in_flight == 0 {
        return Err(BackendError::Config("max in-flight must be at least 1".into()));
    }
    let mut ids = HashSet::with_capacity(requests.len());
    if let Some(dup) = requests.iter().find(|r| !ids.insert(r.id.as_str())) {
        return Err(BackendError::DuplicateId(dup.id.clone()));
    }
    let backend_id = backend.id();
    let slots: Vec<Mutex<Option<Prediction>>> = requests.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..max_in_flight.min(requests.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(request) = requests.get(i) else { break };
                let started = Instant::now();
                let outcome = backend.translate(request);
                let measured = u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX);
                let (hypothesis, failed, error) = match outcome.result {
                    Ok(h) => (h, false, None),
                    Err(e) => (String::new(), true, Some(e)),
                };
                let pred = Prediction {
                    instance_id: request.id.clone(),
                    hypothesis,
                    backend_id: backend_id.clone(),
                    latency_ms: outcome.latency_ms.unwrap_or(measured),
                    attempts: outcome.attempts.max(1),
                    failed,
                    error,
                    raw: outcome.raw,
                };
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(pred);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|s| s.into_inner().unwrap_or_else(|e| e.into_inner()).expect("every request dispatched"))
        .collect())
}

pub fn predictions_to_jsonl(preds: &[Prediction]) -> String {
    jsonl::to_jsonl(preds)
}

pub fn save_predictions(preds: &[Prediction], path: impl AsRef<Path>) -> Result<(), BackendError> {
    Ok(jsonl::write(path.as_ref(), &predictions_to_jsonl(preds))?)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, BackendError> {
    parse_predictions(&jsonl::read_to_string(path.as_ref())?)
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, BackendError> {
    let rows = jsonl::parse_lines::<Prediction>(text)?;
    let mut seen = HashSet::with_capacity(rows.len());
    let mut out = Vec::with_capacity(rows.len());
    for (line, pred) in rows {
        if pred.attempts == 0 {
            return Err(BackendError::Invalid {
                line,
                message: "attempts must be at least 1".into(),
            });
        }
        if !seen.insert(pred.instance_id.clone()) {
            return Err(BackendError::Invalid {
                line,
                message: format!("duplicate id `{}`", pred.instance_id),
            });
        }
        out.push(pred);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(id: &str, prompt: &str) -> TranslationRequest {
        TranslationRequest { id: id.into(), prompt: prompt.into() }
    }

    fn pred(id: &str, h: &str) -> Prediction {
        Prediction {
            instance_id: id.into(),
            hypothesis: h.into(),
            backend_id: "test".into(),
            latency_ms: 3,
            attempts: 1,
            failed: false,
            error: None,
            raw: None,
        }
    }

    #[test]
    fn echo_returns_sentence_payload() {
        let prompt = crate::prompt::render(&crate::prompt::PromptSpec {
            template: crate::prompt::Template::ZeroShot,
            sentence: "Where is the Louvre?".into(),
            target_language_name: "french".into(),
            ne_hints: vec![],
            examples: vec![],
        })
        .unwrap()
        .text;
        let out = translate_batch(&[req("a", &prompt)], &BackendConfig::new(BackendKind::StubEcho)).unwrap();
        assert_eq!(out[0].hypothesis, "Where is the Louvre?");
        assert_eq!(out[0].attempts, 1);
        assert_eq!(out[0].backend_id, "stub_echo");
    }

    #[test]
    fn fixed_backend() {
        let mut cfg = BackendConfig::new(BackendKind::StubFixed);
        assert!(matches!(translate_batch(&[], &cfg), Err(BackendError::Config(_))));
        cfg.fixed_text = Some("ciao".into());
        let out = translate_batch(&[req("a", "x"), req("b", "y")], &cfg).unwrap();
        assert!(out.iter().all(|p| p.hypothesis == "ciao"));
    }

    #[test]
    fn replay_in_input_order_with_failure_marker() {
        let recorded: Vec<_> = (1..=5).map(|i| pred(&format!("r{i}"), &format!("h{i}"))).collect();
        let backend = ReplayBackend::from_predictions("replay:t".into(), recorded);
        let reqs: Vec<_> = ["r5", "r2", "zz", "r1"].iter().map(|id| req(id, "p")).collect();
        let out = dispatch(&reqs, &backend, 3).unwrap();
        let ids: Vec<_> = out.iter().map(|p| p.instance_id.as_str()).collect();
        assert_eq!(ids, ["r5", "r2", "zz", "r1"]);
        assert_eq!(out[0].hypothesis, "h5");
        assert_eq!(out[0].latency_ms, 3);
        assert!(out[2].failed && out[2].error.is_some());
        assert_eq!(out[2].hypothesis, "");
    }

    #[test]
    fn duplicate_request_ids_rejected() {
        let reqs = [req("a", "x"), req("a", "y")];
        assert!(matches!(dispatch(&reqs, &EchoBackend, 2), Err(BackendError::DuplicateId(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::new(BackendKind::HttpChat);
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("http://localhost:1/v1/chat/completions".into());
        assert!(cfg.validate().is_err());
        cfg.token_env = Some("EAMT_TEST_TOKEN".into());
        assert!(cfg.validate().is_ok());
        cfg.max_in_flight = 0;
        assert!(cfg.validate().is_err());
        cfg.max_in_flight = 1;
        cfg.timeout = Duration::ZERO;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn predictions_jsonl() {
        let mut failed = pred("b", "");
        failed.failed = true;
        failed.error = Some("HTTP 503".into());
        let preds = vec![pred("a", "x\ny"), failed, pred("c", " spaced ")];
        let text = predictions_to_jsonl(&preds);
        assert!(text.lines().next().unwrap().starts_with(r#"{"id":"a","hypothesis":"x\ny","backend":"test","latency_ms":3,"attempts":1}"#));
        assert_eq!(parse_predictions(&text).unwrap(), preds);
        assert!(parse_predictions("").unwrap().is_empty());
    }

    #[test]
    fn predictions_validation() {
        let dup = format!("{}{}", predictions_to_jsonl(&[pred("a", "x")]), predictions_to_jsonl(&[pred("a", "y")]));
        assert!(matches!(parse_predictions(&dup), Err(BackendError::Invalid { line: 2, .. })));
        let zero = r#"{"id":"a","hypothesis":"x","backend":"b","latency_ms":0,"attempts":0}"#;
        assert!(matches!(parse_predictions(zero), Err(BackendError::Invalid { line: 1, .. })));
        assert!(matches!(parse_predictions("{\n"), Err(BackendError::Jsonl(JsonlError::Parse { line: 1, .. }))));
    }
}
