//! Run directory layout:
//!
//! ```text
//! config.json           {"fingerprint": ..., "config": RunConfig}
//! problems.jsonl        one Problem per line
//! attempts/<id>.jsonl   one LogLine per line, appended as attempts finish
//! report.json
//! curve.csv             n,solved
//! llm_log.jsonl         live backend only
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AttemptRecord, HarnessError, Problem, RunConfig, SuiteReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogLine {
    Attempt(Box<AttemptRecord>),
    Aborted { reason: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct StoredConfig {
    fingerprint: String,
    config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunStore {
    dir: PathBuf,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::Io(format!("{}: {e}", path.display()))
}

/// File name for a problem log; ids outside `[A-Za-z0-9_.-]` get a hash
/// suffix so distinct ids never share a file.
fn log_file_name(id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
        .collect();
    let safe = match safe.strip_prefix('.') {
        Some(rest) => format!("_{rest}"),
        None => safe,
    };
    if safe == id {
        format!("{id}.jsonl")
    } else {
        let h = hex::encode(Sha256::digest(id.as_bytes()));
        format!("{safe}-{}.jsonl", &h[..12])
    }
}

impl RunStore {
    pub fn create(dir: &Path, config: &RunConfig, problems: &[Problem]) -> Result<Self, HarnessError> {
        if dir.join("config.json").exists() {
            return Err(HarnessError::RunDirExists(dir.to_path_buf()));
        }
        fs::create_dir_all(dir.join("attempts")).map_err(io_err(dir))?;
        let stored = StoredConfig {
            fingerprint: config.fingerprint(),
            config: config.clone(),
        };
        let path = dir.join("config.json");
        fs::write(&path, serde_json::to_string_pretty(&stored).expect("config serialises"))
            .map_err(io_err(&path))?;
        let mut lines = String::new();
        for p in problems {
            lines.push_str(&serde_json::to_string(p).expect("problem serialises"));
            lines.push('\n');
        }
        let path = dir.join("problems.jsonl");
        fs::write(&path, lines).map_err(io_err(&path))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// Opens an existing run whose config fingerprint must equal `expected`.
    pub fn open(dir: &Path, expected: &str) -> Result<Self, HarnessError> {
        let stored = Self::stored_config(dir)?;
        if stored.fingerprint != expected {
            return Err(HarnessError::ConfigMismatch {
                stored: stored.fingerprint,
                current: expected.to_string(),
            });
        }
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn stored_config(dir: &Path) -> Result<StoredConfig, HarnessError> {
        let path = dir.join("config.json");
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
    }

    /// The configuration a run directory was created with.
    pub fn load_config(dir: &Path) -> Result<RunConfig, HarnessError> {
        Self::stored_config(dir).map(|s| s.config)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn problems(&self) -> Result<Vec<Problem>, HarnessError> {
        super::load_problems(&self.dir.join("problems.jsonl"))
    }

    fn log_path(&self, problem_id: &str) -> PathBuf {
        self.dir.join("attempts").join(log_file_name(problem_id))
    }

    pub fn append(&self, problem_id: &str, line: &LogLine) -> Result<(), HarnessError> {
        let path = self.log_path(problem_id);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut text = serde_json::to_string(line).expect("log line serialises");
        text.push('\n');
        f.write_all(text.as_bytes()).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }

    /// Reads a problem log. An unterminated final line is the remnant of an
    /// interrupted write and is dropped; any other malformed line is an error.
    pub fn load(&self, problem_id: &str) -> Result<Vec<LogLine>, HarnessError> {
        let path = self.log_path(problem_id);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let mut out = Vec::new();
        for (n, line) in text.split_inclusive('\n').enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(l) => out.push(l),
                Err(e) if !line.ends_with('\n') => {
                    log::warn!("{}: ignoring torn final line: {e}", path.display());
                }
                Err(e) => {
                    return Err(HarnessError::Io(format!("{}:{}: {e}", path.display(), n + 1)));
                }
            }
        }
        Ok(out)
    }

    pub fn write_report(&self, report: &SuiteReport) -> Result<(), HarnessError> {
        let path = self.dir.join("report.json");
        fs::write(&path, report.to_json()).map_err(io_err(&path))?;
        let path = self.dir.join("curve.csv");
        fs::write(&path, report.curve_csv()).map_err(io_err(&path))
    }
}
