//! Worked examples shipped under `fixtures/<name>/`:
//!
//! ```text
//! problem.json       the Problem record
//! rules.json         scripted prover rule table
//! expected.json      run configuration, canned model responses, expected report
//! transcript.jsonl   recorded model exchange, replayed by ScriptedBackend
//! figures/           proof texts and informal proofs the responses are built from
//! ```
//!
//! `transcript.jsonl` is derived: `cargo run --example refresh_fixtures`
//! rebuilds it from the other files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{HarnessError, Problem, ProblemRun, RunConfig, Runner};
use crate::isar::strip_markers;
use crate::llm::{read_transcript, LlmError, RecordingBackend, ScriptedBackend, TranscriptEntry};
use crate::prover::{ScriptedProver, ScriptedProverRules};

pub const FIXTURE_NAMES: [&str; 3] = ["imo_1974_p5", "imo_1959_p1", "imo_1981_p6"];

pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("fixture {name}: replacement {from:?} not found in {file}")]
    ReplaceMissing { name: String, file: String, from: String },
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// One canned model response, read from a file in the fixture directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSource {
    pub label: String,
    pub file: String,
    /// Drop repair markers, turning an annotated figure back into the text
    /// the model produced.
    #[serde(default)]
    pub strip_markers: bool,
    /// Literal substitutions applied after marker stripping.
    #[serde(default)]
    pub replace: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedReport {
    pub solved: bool,
    pub first_solved_attempt: Option<usize>,
    pub attempts_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedOutcome {
    pub run: RunConfig,
    pub responses: Vec<ResponseSource>,
    pub report: ExpectedReport,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub dir: PathBuf,
    pub problem: Problem,
    pub prover_rules: ScriptedProverRules,
    pub llm_transcript: Vec<TranscriptEntry>,
    pub expected: ExpectedOutcome,
}

pub fn fixtures_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load_fixture(name: &str) -> Result<Fixture, FixtureError> {
    load_fixture_from(&fixtures_root(), name)
}

pub fn load_fixture_from(root: &Path, name: &str) -> Result<Fixture, FixtureError> {
    let mut fixture = load_inputs(root, name)?;
    fixture.llm_transcript = read_transcript(&fixture.dir.join(TRANSCRIPT_FILE))?;
    Ok(fixture)
}

fn read(path: &Path) -> Result<String, FixtureError> {
    std::fs::read_to_string(path).map_err(|e| FixtureError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FixtureError> {
    serde_json::from_str(&read(path)?).map_err(|e| FixtureError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Everything except the transcript.
fn load_inputs(root: &Path, name: &str) -> Result<Fixture, FixtureError> {
    let dir = root.join(name);
    if !dir.join("problem.json").is_file() {
        return Err(FixtureError::UnknownFixture(name.to_string()));
    }
    let problem: Problem = read_json(&dir.join("problem.json"))?;
    let prover_rules = read_json(&dir.join("rules.json"))?;
    let expected = read_json(&dir.join("expected.json"))?;
    Ok(Fixture {
        name: name.to_string(),
        dir,
        problem,
        prover_rules,
        llm_transcript: Vec::new(),
        expected,
    })
}

impl Fixture {
    /// The run configuration, single-threaded so replay order is fixed.
    pub fn config(&self) -> RunConfig {
        RunConfig {
            workers: 1,
            ..self.expected.run.clone()
        }
    }

    pub fn prover(&self) -> Arc<ScriptedProver> {
        Arc::new(ScriptedProver::new(self.prover_rules.clone()).expect("fixture rules compile"))
    }

    pub fn llm(&self) -> Arc<ScriptedBackend> {
        Arc::new(ScriptedBackend::new(self.llm_transcript.clone()))
    }

    pub fn figure(&self, file: &str) -> Result<String, FixtureError> {
        read(&self.dir.join(file))
    }

    /// Canned model responses in request order, labelled.
    pub fn responses(&self) -> Result<Vec<(String, String)>, FixtureError> {
        self.expected
            .responses
            .iter()
            .map(|src| {
                let mut text = self.figure(&src.file)?;
                if src.strip_markers {
                    text = strip_markers(&text);
                }
                for (from, to) in &src.replace {
                    if !text.contains(from.as_str()) {
                        return Err(FixtureError::ReplaceMissing {
                            name: self.name.clone(),
                            file: src.file.clone(),
                            from: from.clone(),
                        });
                    }
                    text = text.replacen(from.as_str(), to, 1);
                }
                Ok((src.label.clone(), text))
            })
            .collect()
    }

    /// Replays the recorded exchange against the scripted prover.
    pub fn run(&self) -> Result<ProblemRun, FixtureError> {
        let runner = Runner::new(self.config(), self.prover(), self.llm())?;
        Ok(runner.run_problem(&self.problem)?)
    }
}

/// Runs a fixture against its canned responses and returns the exchange as a
/// replayable transcript.
pub fn record_transcript(root: &Path, name: &str) -> Result<Vec<TranscriptEntry>, FixtureError> {
    let fixture = load_inputs(root, name)?;
    let responses = fixture.responses()?;
    let recorder = Arc::new(RecordingBackend::labelled(
        responses.into_iter().map(|(label, text)| (Some(label), text)),
    ));
    let runner = Runner::new(fixture.config(), fixture.prover(), recorder.clone())?;
    let run = runner.run_problem(&fixture.problem)?;
    if let Some(reason) = run.aborted {
        return Err(FixtureError::Malformed {
            path: fixture.dir,
            message: format!("recording aborted: {reason}"),
        });
    }
    Ok(recorder.entries())
}
