//! Client for external quality scorers speaking `eamt-scorer/1`.
//!
//! The protocol is newline-delimited JSON over a subprocess's stdin/stdout or
//! a TCP connection:
//!
//! 1. The scorer first writes a handshake line:
//!    `{"protocol":"eamt-scorer/1","metric":"<name>", ...}`.
//! 2. The client writes one request per item, `{"id","src","mt","ref"}`, then
//!    closes its writing side.
//! 3. The scorer answers each request in order with `{"id","score"}`
//!    (`score` in `[0, 1]`) or `{"id":..,"error":".."}`.
//!
//! A bad response only fails its own item.

use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Command, Stdio};
use std::time::Duration;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL: &str = "eamt-scorer/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerEndpoint {
    Subprocess { program: String, args: Vec<String> },
    /// `host:port`
    Tcp(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: String,
    pub src: String,
    pub mt: String,
    #[serde(rename = "ref")]
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScores {
    /// The metric named in the handshake.
    pub metric: String,
    /// Handshake fields beyond `protocol` and `metric`.
    pub handshake_extras: serde_json::Map<String, Value>,
    /// One entry per request id, in request order.
    pub scores: IndexMap<String, Result<f64, String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScorerError {
    #[error("scorer unavailable: {0} (the built-in chrF metric works offline)")]
    Unavailable(String),
    #[error("bad scorer handshake: {0}")]
    Handshake(String),
    #[error("duplicate request id `{0}`")]
    DuplicateId(String),
}

/// Scores `batch` in one session against `endpoint`. An empty batch returns
/// immediately without contacting the scorer.
pub fn external_score(batch: &[ScoreRequest], endpoint: &ScorerEndpoint) -> Result<ExternalScores, ScorerError> {
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = batch.iter().find(|r| !seen.insert(r.id.as_str())) {
        return Err(ScorerError::DuplicateId(dup.id.clone()));
    }
    if batch.is_empty() {
        return Ok(ExternalScores {
            metric: String::new(),
            handshake_extras: Default::default(),
            scores: IndexMap::new(),
        });
    }
    match endpoint {
        ScorerEndpoint::Subprocess { program, args } => {
            let mut child = Command::new(program)
                .args(args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|e| ScorerError::Unavailable(format!("cannot start `{program}`: {e}")))?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = child.stdout.take().expect("piped stdout");
            let result = run_session(BufReader::new(stdout), stdin, batch);
            if result.is_err() {
                let _ = child.kill();
            }
            let _ = child.wait();
            result
        }
        ScorerEndpoint::Tcp(addr) => {
            let stream = TcpStream::connect(addr)
                .map_err(|e| ScorerError::Unavailable(format!("cannot connect to {addr}: {e}")))?;
            let _ = stream.set_read_timeout(Some(Duration::from_secs(600)));
            let writer = stream
                .try_clone()
                .map_err(|e| ScorerError::Unavailable(e.to_string()))?;
            let closer = stream
                .try_clone()
                .map_err(|e| ScorerError::Unavailable(e.to_string()))?;
            let result = run_session(BufReader::new(stream), ShutdownOnDrop(writer), batch);
            let _ = closer.shutdown(Shutdown::Both);
            result
        }
    }
}

/// Half-closes the TCP write side when the request writer finishes.
struct ShutdownOnDrop(TcpStream);

impl Write for ShutdownOnDrop {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.write(buf)
    }
    fn flush(&mut self) -> std::io::Result<()> {
        self.0.flush()
    }
}

impl Drop for ShutdownOnDrop {
    fn drop(&mut self) {
        let _ = self.0.shutdown(Shutdown::Write);
    }
}

/// Runs the protocol over any line reader and writer.
pub fn run_session<R, W>(mut reader: R, writer: W, batch: &[ScoreRequest]) -> Result<ExternalScores, ScorerError>
where
    R: BufRead,
    W: Write + Send,
{
    let mut line = String::new();
    let n = reader
        .read_line(&mut line)
        .map_err(|e| ScorerError::Unavailable(format!("reading handshake: {e}")))?;
    if n == 0 {
        return Err(ScorerError::Unavailable("scorer closed before the handshake".into()));
    }
    let handshake: Value =
        serde_json::from_str(line.trim()).map_err(|e| ScorerError::Handshake(format!("{e}: {}", line.trim())))?;
    let Value::Object(mut handshake) = handshake else {
        return Err(ScorerError::Handshake("expected a JSON object".into()));
    };
    match handshake.remove("protocol") {
        Some(Value::String(p)) if p == PROTOCOL => {}
        other => {
            return Err(ScorerError::Handshake(format!(
                "expected protocol {PROTOCOL:?}, got {}",
                other.map_or_else(|| "none".to_owned(), |v| v.to_string())
            )))
        }
    }
    let metric = match handshake.remove("metric") {
        Some(Value::String(m)) if !m.is_empty() => m,
        _ => return Err(ScorerError::Handshake("missing `metric`".into())),
    };

    let mut scores = IndexMap::with_capacity(batch.len());
    std::thread::scope(|scope| {
        let writer_thread = scope.spawn(move || -> std::io::Result<()> {
            let mut w = std::io::BufWriter::new(writer);
            for req in batch {
                serde_json::to_writer(&mut w, req)?;
                w.write_all(b"\n")?;
            }
            w.flush()
            // dropping `w` closes the stream
        });

        for req in batch {
            line.clear();
            let outcome = match reader.read_line(&mut line) {
                Ok(0) => Err("scorer closed the stream before answering".to_owned()),
                Ok(_) => check_response(line.trim(), &req.id),
                Err(e) => Err(format!("read error: {e}")),
            };
            scores.insert(req.id.clone(), outcome);
        }
        // A writer error (e.g. the scorer exited early) already shows up as
        // unanswered items.
        let _ = writer_thread.join();
    });
    Ok(ExternalScores {
        metric,
        handshake_extras: handshake,
        scores,
    })
}

fn check_response(line: &str, expected_id: &str) -> Result<f64, String> {
    let v: Value = serde_json::from_str(line).map_err(|e| format!("malformed response: {e}"))?;
    if let Some(err) = v.get("error") {
        return Err(format!("scorer error: {}", err.as_str().map_or_else(|| err.to_string(), str::to_owned)));
    }
    match v.get("id") {
        Some(Value::String(id)) if id == expected_id => {}
        Some(other) => return Err(format!("response id {other} does not match request `{expected_id}`")),
        None => return Err("response has no id".into()),
    }
    let score = v
        .get("score")
        .and_then(Value::as_f64)
        .ok_or_else(|| "response has no numeric score".to_owned())?;
    if !(0.0..=1.0).contains(&score) {
        return Err(format!("score {score} is outside [0, 1]"));
    }
    Ok(score)
}
