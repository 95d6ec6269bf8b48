//! Chat-completion backends.
//!
//! [`ScriptedBackend`] replays a JSONL transcript of `{fingerprint, response}`
//! records and refuses any request whose fingerprint differs from the next
//! record. [`HttpBackend`] talks to a chat-completions endpoint.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::conjecture::{ChatMessage, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompletionParams {
    pub temperature: f64,
    pub max_output: u32,
    pub model_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_hint: Option<u64>,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            max_output: 2048,
            model_name: "gpt-4".into(),
            seed_hint: None,
        }
    }
}

impl CompletionParams {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidParams(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.model_name.is_empty() {
            return Err(LlmError::InvalidParams("empty model name".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("model backend failed: {0}")]
    Backend(String),
    #[error("transcript mismatch at entry {index}: expected {expected}, got {actual}")]
    TranscriptMismatch {
        index: usize,
        expected: String,
        actual: String,
    },
    #[error("request budget of {limit} exhausted")]
    BudgetExceeded { limit: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid completion parameters: {0}")]
    InvalidParams(String),
    #[error("cannot load transcript: {0}")]
    Transcript(String),
}

/// Stable content hash of a request.
pub fn fingerprint(messages: &[ChatMessage], params: &CompletionParams) -> String {
    // serde_json objects serialise with sorted keys, so this is canonical.
    let doc = serde_json::json!({ "messages": messages, "params": params });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

fn check_request(messages: &[ChatMessage], params: &CompletionParams) -> Result<(), LlmError> {
    match messages.first() {
        None => return Err(LlmError::InvalidRequest("no messages".into())),
        Some(m) if m.role != Role::System => {
            return Err(LlmError::InvalidRequest("first message must be the system message".into()))
        }
        _ => {}
    }
    params.validate()
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, messages: &[ChatMessage], params: &CompletionParams) -> Result<String, LlmError>;

    /// Upper bound on concurrent callers; `Some(1)` forces a sequential run.
    fn max_concurrency(&self) -> Option<usize> {
        None
    }

    /// Accounts for requests answered in an earlier, resumed run.
    fn skip_recorded(&self, _fingerprints: &[String]) -> Result<(), LlmError> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub fn read_transcript(path: &Path) -> Result<Vec<TranscriptEntry>, LlmError> {
    let file = std::fs::File::open(path)
        .map_err(|e| LlmError::Transcript(format!("{}: {e}", path.display())))?;
    parse_transcript(BufReader::new(file))
}

pub fn parse_transcript(reader: impl BufRead) -> Result<Vec<TranscriptEntry>, LlmError> {
    let mut entries = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| LlmError::Transcript(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line)
            .map_err(|e| LlmError::Transcript(format!("line {}: {e}", n + 1)))?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn write_transcript(path: &Path, entries: &[TranscriptEntry]) -> std::io::Result<()> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    std::fs::write(path, out)
}

/// Cursor-ordered replay. Strictly sequential.
#[derive(Debug)]
pub struct ScriptedBackend {
    entries: Vec<TranscriptEntry>,
    cursor: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(entries: Vec<TranscriptEntry>) -> Self {
        Self {
            entries,
            cursor: Mutex::new(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        read_transcript(path).map(Self::new)
    }

    pub fn position(&self) -> usize {
        *self.cursor.lock().unwrap()
    }

    pub fn remaining(&self) -> usize {
        self.entries.len() - self.position()
    }

    fn advance(&self, actual: &str) -> Result<&TranscriptEntry, LlmError> {
        let mut cursor = self.cursor.lock().unwrap();
        let index = *cursor;
        let Some(entry) = self.entries.get(index) else {
            return Err(LlmError::TranscriptMismatch {
                index,
                expected: "end of transcript".into(),
                actual: actual.to_string(),
            });
        };
        if entry.fingerprint != actual {
            return Err(LlmError::TranscriptMismatch {
                index,
                expected: entry.fingerprint.clone(),
                actual: actual.to_string(),
            });
        }
        *cursor += 1;
        Ok(entry)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, messages: &[ChatMessage], params: &CompletionParams) -> Result<String, LlmError> {
        check_request(messages, params)?;
        let fp = fingerprint(messages, params);
        self.advance(&fp).map(|e| e.response.clone())
    }

    fn max_concurrency(&self) -> Option<usize> {
        Some(1)
    }

    fn skip_recorded(&self, fingerprints: &[String]) -> Result<(), LlmError> {
        for fp in fingerprints {
            self.advance(fp)?;
        }
        Ok(())
    }
}

/// Hands out canned responses in order and records what was asked, producing
/// a transcript that [`ScriptedBackend`] can replay.
#[derive(Debug, Default)]
pub struct RecordingBackend {
    responses: Vec<(Option<String>, String)>,
    recorded: Mutex<Vec<TranscriptEntry>>,
}

impl RecordingBackend {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Self {
        Self::labelled(responses.into_iter().map(|r| (None, r)))
    }

    pub fn labelled(responses: impl IntoIterator<Item = (Option<String>, String)>) -> Self {
        Self {
            responses: responses.into_iter().collect(),
            recorded: Mutex::new(Vec::new()),
        }
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.recorded.lock().unwrap().clone()
    }
}

impl ChatBackend for RecordingBackend {
    fn complete(&self, messages: &[ChatMessage], params: &CompletionParams) -> Result<String, LlmError> {
        check_request(messages, params)?;
        let mut recorded = self.recorded.lock().unwrap();
        let Some((label, response)) = self.responses.get(recorded.len()) else {
            return Err(LlmError::Backend(format!(
                "no canned response left after {} requests",
                recorded.len()
            )));
        };
        recorded.push(TranscriptEntry {
            fingerprint: fingerprint(messages, params),
            response: response.clone(),
            label: label.clone(),
        });
        Ok(response.clone())
    }

    fn max_concurrency(&self) -> Option<usize> {
        Some(1)
    }
}

/// Per-run request cap shared by all problems.
pub struct BudgetedBackend {
    inner: Arc<dyn ChatBackend>,
    limit: Option<usize>,
    used: AtomicUsize,
}

impl BudgetedBackend {
    pub fn new(inner: Arc<dyn ChatBackend>, limit: Option<usize>) -> Self {
        Self {
            inner,
            limit,
            used: AtomicUsize::new(0),
        }
    }

    pub fn used(&self) -> usize {
        self.used.load(Ordering::SeqCst)
    }
}

impl ChatBackend for BudgetedBackend {
    fn complete(&self, messages: &[ChatMessage], params: &CompletionParams) -> Result<String, LlmError> {
        if let Some(limit) = self.limit {
            let claimed = self
                .used
                .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| (n < limit).then_some(n + 1));
            if claimed.is_err() {
                return Err(LlmError::BudgetExceeded { limit });
            }
        } else {
            self.used.fetch_add(1, Ordering::SeqCst);
        }
        self.inner.complete(messages, params)
    }

    fn max_concurrency(&self) -> Option<usize> {
        self.inner.max_concurrency()
    }

    fn skip_recorded(&self, fingerprints: &[String]) -> Result<(), LlmError> {
        self.used.fetch_add(fingerprints.len(), Ordering::SeqCst);
        self.inner.skip_recorded(fingerprints)
    }
}

/// OpenAI-style `POST {base_url}/chat/completions`.
#[derive(Debug)]
pub struct HttpBackend {
    pub base_url: String,
    api_key: Option<String>,
    pub tries: u32,
    pub initial_backoff: Duration,
    pub log_path: Option<PathBuf>,
    agent: ureq::Agent,
    log_lock: Mutex<()>,
}

#[derive(Serialize)]
struct RequestBody<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct ResponseBody {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

enum Failure {
    Transient(String),
    Fatal(String),
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(600)))
            .build()
            .new_agent();
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            tries: 3,
            initial_backoff: Duration::from_secs(2),
            log_path: None,
            agent,
            log_lock: Mutex::new(()),
        }
    }

    /// Reads the key from the environment variable `key_var`, if set.
    pub fn from_env(base_url: impl Into<String>, key_var: &str) -> Self {
        Self::new(base_url, std::env::var(key_var).ok().filter(|k| !k.is_empty()))
    }

    fn attempt(&self, body: &str) -> Result<String, Failure> {
        let mut req = self
            .agent
            .post(format!("{}/chat/completions", self.base_url))
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send(body)
            .map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Transient(e.to_string()))?;
        match status {
            200..=299 => Ok(text),
            429 | 500..=599 => Err(Failure::Transient(format!("HTTP {status}: {text}"))),
            _ => Err(Failure::Fatal(format!("HTTP {status}: {text}"))),
        }
    }

    fn log(&self, request: &str, outcome: &Result<String, String>) {
        let Some(path) = &self.log_path else { return };
        let redact = |s: &str| match &self.api_key {
            Some(k) if !k.is_empty() => s.replace(k.as_str(), "[REDACTED]"),
            _ => s.to_string(),
        };
        let entry = serde_json::json!({
            "url": format!("{}/chat/completions", self.base_url),
            "request": redact(request),
            "response": outcome.as_ref().ok().map(|s| redact(s)),
            "error": outcome.as_ref().err().map(|s| redact(s)),
        });
        let _guard = self.log_lock.lock().unwrap();
        let written = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| writeln!(f, "{entry}"));
        if let Err(e) = written {
            log::warn!("cannot append to {}: {e}", path.display());
        }
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, messages: &[ChatMessage], params: &CompletionParams) -> Result<String, LlmError> {
        check_request(messages, params)?;
        let body = serde_json::to_string(&RequestBody {
            model: &params.model_name,
            messages,
            temperature: params.temperature,
            max_tokens: params.max_output,
            seed: params.seed_hint,
        })
        .map_err(|e| LlmError::InvalidRequest(e.to_string()))?;

        let mut backoff = self.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.tries.max(1) {
            match self.attempt(&body) {
                Ok(text) => {
                    self.log(&body, &Ok(text.clone()));
                    let parsed: ResponseBody = serde_json::from_str(&text)
                        .map_err(|e| LlmError::Backend(format!("malformed response: {e}")))?;
                    return parsed
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| LlmError::Backend("response has no choices".into()));
                }
                Err(Failure::Fatal(e)) => {
                    self.log(&body, &Err(e.clone()));
                    return Err(LlmError::Backend(e));
                }
                Err(Failure::Transient(e)) => {
                    self.log(&body, &Err(e.clone()));
                    log::warn!("completion attempt {attempt} failed: {e}");
                    last = e;
                    if attempt < self.tries {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(LlmError::Backend(last))
    }
}
