//! Generic chat-completion backend.
//!
//! Request: `POST <endpoint>` with bearer auth and body
//! `{"model": .., "messages": [{"role": "user", "content": <prompt>}], "temperature": ..}`.
//! Response: the hypothesis is read from `choices[0].message.content`.

use std::time::Duration;

use serde_json::{json, Value};
use tracing::debug;

use super::{Backend, BackendConfig, BackendError, Outcome, TranslationRequest};
use crate::retry::RetryPolicy;

pub struct ChatBackend {
    http: reqwest::blocking::Client,
    endpoint: String,
    token: String,
    model: String,
    temperature: f64,
    retry: RetryPolicy,
}

impl ChatBackend {
    /// Fails when the token variable is unset, before any request is made.
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        let var = config.token_env.as_deref().unwrap_or_default();
        let token = std::env::var(var)
            .ok()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| BackendError::Config(format!("environment variable `{var}` is not set")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .user_agent(format!("eamt/{}", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(ChatBackend {
            http,
            endpoint: config.endpoint.clone().unwrap_or_default(),
            token,
            model: config.model.clone(),
            temperature: config.temperature,
            retry: RetryPolicy {
                max_retries: config.max_retries,
                base_delay: config.retry_base_delay,
                max_delay: config.retry_max_delay,
                jitter: true,
            },
        })
    }

    fn body(&self, prompt: &str) -> Value {
        json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        })
    }
}

fn retry_after(resp: &reqwest::blocking::Response) -> Duration {
    resp.headers()
        .get(reqwest::header::RETRY_AFTER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map_or(Duration::ZERO, Duration::from_secs)
}

/// Trims surrounding whitespace and a wrapping Markdown code fence.
pub fn clean_response(text: &str) -> String {
    let trimmed = text.trim();
    if let Some(inner) = trimmed.strip_prefix("```") {
        if let Some(body) = inner.strip_suffix("```") {
            // drop an info string such as ```text
            let body = match body.split_once('\n') {
                Some((info, rest)) if !info.trim().contains(' ') => rest,
                _ => body,
            };
            return body.trim().to_owned();
        }
    }
    trimmed.to_owned()
}

impl Backend for ChatBackend {
    fn id(&self) -> String {
        format!("http_chat:{}", self.model)
    }

    fn translate(&self, request: &TranslationRequest) -> Outcome {
        let seed = request.id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        });
        let mut backoff = self.retry.backoff(seed);
        let mut attempts = 0;
        loop {
            attempts += 1;
            let sent = self
                .http
                .post(&self.endpoint)
                .bearer_auth(&self.token)
                .json(&self.body(&request.prompt))
                .send();
            let (floor, error) = match sent {
                Ok(resp) if resp.status().is_success() => {
                    let result = resp
                        .json::<Value>()
                        .map_err(|e| format!("invalid response body: {e}"))
                        .and_then(|body| {
                            body.pointer("/choices/0/message/content")
                                .and_then(Value::as_str)
                                .map(str::to_owned)
                                .ok_or_else(|| "response has no choices[0].message.content".to_owned())
                        });
                    return match result {
                        Ok(raw) => {
                            let hypothesis = clean_response(&raw);
                            Outcome {
                                raw: (hypothesis != raw).then_some(raw),
                                result: Ok(hypothesis),
                                attempts,
                                latency_ms: None,
                            }
                        }
                        Err(e) => Outcome {
                            result: Err(e),
                            raw: None,
                            attempts,
                            latency_ms: None,
                        },
                    };
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    let err = format!("HTTP {status}");
                    if status != 429 && !(500..600).contains(&status) {
                        return Outcome {
                            result: Err(err),
                            raw: None,
                            attempts,
                            latency_ms: None,
                        };
                    }
                    (retry_after(&resp), err)
                }
                Err(e) => (Duration::ZERO, e.to_string()),
            };
            match backoff.next_delay_at_least(floor) {
                Some(delay) => {
                    debug!(id = %request.id, attempts, ?delay, %error, "retrying chat request");
                    std::thread::sleep(delay);
                }
                None => {
                    return Outcome {
                        result: Err(error),
                        raw: None,
                        attempts,
                        latency_ms: None,
                    }
                }
            }
        }
    }
}
