//! Per-problem attempt loop and suite orchestration.
//!
//! Each attempt obtains an informal proof, asks the model for a formal
//! sketch (fresh or refined, per the patch schedule), validates it step by
//! step with optional tool correction, and persists the record before the
//! next attempt starts. Problems run concurrently; attempts within a problem
//! are sequential.

mod report;
mod store;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use report::{CurvePoint, ProblemSummary, SplitSummary, SuiteReport};
pub use store::{LogLine, RunStore};

use crate::conjecture::{
    format_feedback, plan_round, ChatMessage, ConjectureError, ErrorFeedback, PromptTemplates, RoundKind,
    RoundPlan, DEFAULT_FEEDBACK_CAP,
};
use crate::isar::{check_validity, parse_proof, render_with_markers, ValidityReport, HEADER_KEYWORDS, PROOF_OPENERS};
use crate::llm::{fingerprint, BudgetedBackend, ChatBackend, CompletionParams, HttpBackend, LlmError, ScriptedBackend};
use crate::prover::{BridgeProver, ProverBackend, ProverError, ProverSession, ScriptedProver, StepTimeouts};
use crate::tool_correction::{ProofOutcome, ToolCorrection, ToolList, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[serde(alias = "validation")]
    Valid,
    Test,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub split: Split,
    pub formal_statement: String,
    #[serde(default)]
    pub informal_statement: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_informal_proof: Option<String>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("problem suite is empty")]
    EmptySuite,
    #[error("duplicate problem id {0:?}")]
    DuplicateId(String),
    #[error("problem {id:?}: {reason}")]
    InvalidProblem { id: String, reason: String },
    #[error("{0}")]
    Io(String),
    #[error("{} already holds a run; resume it instead", .0.display())]
    RunDirExists(PathBuf),
    #[error("run directory was created with config {stored}, current config is {current}")]
    ConfigMismatch { stored: String, current: String },
}

pub fn parse_problems(text: &str) -> Result<Vec<Problem>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::Io(format!("problem line {}: {e}", n + 1)))
        })
        .collect()
}

pub fn load_problems(path: &Path) -> Result<Vec<Problem>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    parse_problems(&text)
}

pub fn validate_suite(problems: &[Problem]) -> Result<(), HarnessError> {
    if problems.is_empty() {
        return Err(HarnessError::EmptySuite);
    }
    let mut seen = std::collections::HashSet::new();
    for p in problems {
        if !seen.insert(p.id.as_str()) {
            return Err(HarnessError::DuplicateId(p.id.clone()));
        }
        if p.formal_statement.trim().is_empty() {
            return Err(HarnessError::InvalidProblem {
                id: p.id.clone(),
                reason: "empty formal statement".into(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InformalSource {
    Human,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProverBackendConfig {
    Scripted { rules: PathBuf },
    Bridge { addr: String },
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LlmBackendConfig {
    Scripted {
        transcript: PathBuf,
    },
    Http {
        base_url: String,
        #[serde(default = "default_key_env")]
        api_key_env: String,
    },
}

pub type Backends = (Arc<dyn ProverBackend>, Arc<dyn ChatBackend>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub attempts: usize,
    pub k: usize,
    pub tc_enabled: bool,
    pub cc_enabled: bool,
    pub informal_source: InformalSource,
    pub tools: ToolList,
    pub skip_duplicate_tools: bool,
    pub completion: CompletionParams,
    pub feedback_cap: usize,
    pub timeouts: StepTimeouts,
    pub workers: usize,
    /// Consecutive transient backend failures tolerated before a problem is
    /// abandoned.
    pub max_backend_errors: usize,
    /// Model requests allowed across the whole run; `None` is unlimited.
    pub max_requests: Option<usize>,
    pub prompts: PromptTemplates,
    pub prover_backend: Option<ProverBackendConfig>,
    pub llm_backend: Option<LlmBackendConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            attempts: 200,
            k: 5,
            tc_enabled: true,
            cc_enabled: true,
            informal_source: InformalSource::Human,
            tools: ToolList::default(),
            skip_duplicate_tools: true,
            completion: CompletionParams::default(),
            feedback_cap: DEFAULT_FEEDBACK_CAP,
            timeouts: StepTimeouts::default(),
            workers: 4,
            max_backend_errors: 3,
            max_requests: None,
            prompts: PromptTemplates::default(),
            prover_backend: None,
            llm_backend: None,
        }
    }
}

/// Fields that do not influence any attempt and may change between a run and
/// its resumption.
const OPERATIONAL_FIELDS: [&str; 3] = ["workers", "max_requests", "max_backend_errors"];

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.attempts == 0 {
            return bad("attempts must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.feedback_cap == 0 {
            return bad("feedback_cap must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.max_backend_errors == 0 {
            return bad("max_backend_errors must be at least 1");
        }
        if !(self.timeouts.default_secs > 0.0 && self.timeouts.sledgehammer_secs > 0.0) {
            return bad("step timeouts must be positive");
        }
        self.completion
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Patch size actually used: without refinement every round is initial.
    pub fn effective_k(&self) -> usize {
        if self.cc_enabled {
            self.k
        } else {
            1
        }
    }

    pub fn fingerprint(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = v.as_object_mut() {
            for f in OPERATIONAL_FIELDS {
                obj.remove(f);
            }
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    pub fn tool_correction(&self) -> ToolCorrection {
        ToolCorrection {
            tools: self.tools.clone(),
            enabled: self.tc_enabled,
            skip_duplicates: self.skip_duplicate_tools,
        }
    }

    /// Instantiates the configured backends. Relative paths resolve against
    /// `base`; a live model backend logs to `log_dir/llm_log.jsonl`.
    pub fn build_backends(
        &self,
        base: &Path,
        log_dir: Option<&Path>,
    ) -> Result<Backends, HarnessError> {
        let cfg = |m: String| HarnessError::Config(m);
        let prover: Arc<dyn ProverBackend> = match &self.prover_backend {
            None => return Err(cfg("no prover_backend configured".into())),
            Some(ProverBackendConfig::Scripted { rules }) => {
                Arc::new(ScriptedProver::load(&base.join(rules)).map_err(|e| cfg(e.to_string()))?)
            }
            Some(ProverBackendConfig::Bridge { addr }) => Arc::new(BridgeProver::new(addr.clone())),
        };
        let llm: Arc<dyn ChatBackend> = match &self.llm_backend {
            None => return Err(cfg("no llm_backend configured".into())),
            Some(LlmBackendConfig::Scripted { transcript }) => {
                Arc::new(ScriptedBackend::load(&base.join(transcript)).map_err(|e| cfg(e.to_string()))?)
            }
            Some(LlmBackendConfig::Http { base_url, api_key_env }) => {
                if base_url.is_empty() {
                    return Err(cfg("http backend needs a base_url".into()));
                }
                let mut http = HttpBackend::from_env(base_url.clone(), api_key_env);
                http.log_path = log_dir.map(|d| d.join("llm_log.jsonl"));
                Arc::new(http)
            }
        };
        Ok((prover, llm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptVerdict {
    Success,
    TacticFailed,
    ProofIncomplete,
    ParseFailed,
}

impl From<Verdict> for AttemptVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Success => Self::Success,
            Verdict::TacticFailed => Self::TacticFailed,
            Verdict::ProofIncomplete => Self::ProofIncomplete,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTiming {
    pub informal_ms: u64,
    pub formal_ms: u64,
    pub validation_ms: u64,
}

/// Integer-keyed maps arrive with string keys when a record is read through
/// the tagged [`store::LogLine`] wrapper, so keys are parsed explicitly.
mod index_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<usize, String>, s: S) -> Result<S::Ok, S::Error> {
        map.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, String>, D::Error> {
        BTreeMap::<String, String>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub problem_id: String,
    pub attempt_index: usize,
    pub round: RoundPlan,
    pub informal_proof: String,
    pub raw_formal_proof: String,
    /// Full theory text submitted for validation.
    pub candidate: String,
    /// Candidate with repaired steps replaced and marked.
    pub validated_proof: Option<String>,
    pub verdict: AttemptVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub validity: ValidityReport,
    #[serde(with = "index_keys")]
    pub substitutions: BTreeMap<usize, String>,
    pub solved: bool,
    pub feedback_sent: Option<ErrorFeedback>,
    pub feedback_for_next: Option<ErrorFeedback>,
    pub formal_request: Vec<ChatMessage>,
    pub llm_fingerprints: Vec<String>,
    pub outcome: Option<ProofOutcome>,
    pub timing: StageTiming,
}

impl AttemptRecord {
    /// What the next refinement round shows the model as its last answer.
    pub fn previous_response(&self) -> &str {
        self.validated_proof.as_deref().unwrap_or(&self.raw_formal_proof)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblemRun {
    pub records: Vec<AttemptRecord>,
    pub aborted: Option<String>,
}

impl ProblemRun {
    pub fn first_solved(&self) -> Option<usize> {
        self.records.iter().find(|r| r.solved).map(|r| r.attempt_index)
    }

    fn from_log(lines: Vec<LogLine>, keep_abort: bool) -> Self {
        let mut run = Self::default();
        for line in lines {
            match line {
                LogLine::Attempt(r) => run.records.push(*r),
                LogLine::Aborted { reason } if keep_abort => run.aborted = Some(reason),
                LogLine::Aborted { .. } => {}
            }
        }
        run
    }
}

/// Execution limits for one invocation.
#[derive(Debug, Clone, Default)]
pub struct RunControl {
    /// Stop starting new attempts after this many, counted across problems.
    pub stop_after_attempts: Option<usize>,
    pub cancel: Arc<AtomicBool>,
    /// Re-run problems a previous invocation abandoned.
    pub retry_aborted: bool,
}

enum AttemptError {
    Transient(String),
    Fatal(String),
}

impl From<LlmError> for AttemptError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Backend(_) => Self::Transient(e.to_string()),
            _ => Self::Fatal(e.to_string()),
        }
    }
}

impl From<ProverError> for AttemptError {
    fn from(e: ProverError) -> Self {
        match e {
            ProverError::BridgeUnavailable(_) | ProverError::Protocol(_) | ProverError::Timeout => {
                Self::Transient(e.to_string())
            }
            ProverError::BadStatement(_) | ProverError::SessionClosed => Self::Fatal(e.to_string()),
        }
    }
}

impl From<ConjectureError> for AttemptError {
    fn from(e: ConjectureError) -> Self {
        Self::Fatal(e.to_string())
    }
}

fn strip_code_fence(text: &str) -> &str {
    let Some(open) = text.find("```") else { return text };
    let after = &text[open..];
    let body_start = open + after.find('\n').map_or(after.len(), |n| n + 1);
    let body = &text[body_start..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

fn first_word(text: &str) -> &str {
    let end = text
        .find(|c: char| c.is_whitespace() || c == '(')
        .unwrap_or(text.len());
    &text[..end]
}

/// Turns a model response into a complete theory fragment: responses that
/// restate the theorem are used as they are, bare proof bodies get the
/// statement (and `proof -` unless they open a proof themselves) prepended.
pub fn assemble_candidate(formal_statement: &str, response: &str) -> String {
    let body = strip_code_fence(response).trim();
    let has_header = body
        .lines()
        .any(|l| HEADER_KEYWORDS.contains(&first_word(l.trim_start())));
    if has_header {
        body.to_string()
    } else if PROOF_OPENERS.contains(&first_word(body)) {
        format!("{}\n{}", formal_statement.trim_end(), body)
    } else {
        format!("{}\nproof -\n{}", formal_statement.trim_end(), body)
    }
}

fn millis(since: Instant) -> u64 {
    since.elapsed().as_millis() as u64
}

pub struct Runner {
    config: RunConfig,
    prover: Arc<dyn ProverBackend>,
    llm: Arc<BudgetedBackend>,
    control: RunControl,
    executed: AtomicUsize,
}

impl Runner {
    pub fn new(
        config: RunConfig,
        prover: Arc<dyn ProverBackend>,
        llm: Arc<dyn ChatBackend>,
    ) -> Result<Self, HarnessError> {
        config.validate()?;
        let llm = Arc::new(BudgetedBackend::new(llm, config.max_requests));
        Ok(Self {
            config,
            prover,
            llm,
            control: RunControl::default(),
            executed: AtomicUsize::new(0),
        })
    }

    pub fn with_control(mut self, control: RunControl) -> Self {
        self.control = control;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Model requests issued by this runner.
    pub fn requests_used(&self) -> usize {
        self.llm.used()
    }

    fn should_stop(&self) -> bool {
        self.control.cancel.load(Ordering::SeqCst)
            || self
                .control
                .stop_after_attempts
                .is_some_and(|limit| self.executed.load(Ordering::SeqCst) >= limit)
    }

    /// Runs one problem in memory, without persistence.
    pub fn run_problem(&self, problem: &Problem) -> Result<ProblemRun, HarnessError> {
        self.drive(problem, ProblemRun::default(), None)
    }

    fn drive(
        &self,
        problem: &Problem,
        mut run: ProblemRun,
        store: Option<&RunStore>,
    ) -> Result<ProblemRun, HarnessError> {
        let persist = |line: LogLine| match store {
            Some(s) => s.append(&problem.id, &line),
            None => Ok(()),
        };
        let recorded: Vec<String> = run
            .records
            .iter()
            .flat_map(|r| r.llm_fingerprints.iter().cloned())
            .collect();
        if let Err(e) = self.llm.skip_recorded(&recorded) {
            let reason = e.to_string();
            persist(LogLine::Aborted { reason: reason.clone() })?;
            run.aborted = Some(reason);
            return Ok(run);
        }
        if run.aborted.is_some() || run.first_solved().is_some() {
            return Ok(run);
        }

        let mut consecutive_errors = 0;
        while run.records.len() < self.config.attempts && !self.should_stop() {
            let index = run.records.len();
            match self.attempt(problem, index, run.records.last()) {
                Ok(record) => {
                    consecutive_errors = 0;
                    persist(LogLine::Attempt(Box::new(record.clone())))?;
                    self.executed.fetch_add(1, Ordering::SeqCst);
                    let solved = record.solved;
                    run.records.push(record);
                    if solved {
                        break;
                    }
                }
                Err(AttemptError::Transient(msg)) => {
                    consecutive_errors += 1;
                    log::warn!(
                        "{} attempt {index}: {msg} ({consecutive_errors}/{})",
                        problem.id,
                        self.config.max_backend_errors
                    );
                    if consecutive_errors >= self.config.max_backend_errors {
                        let reason = format!("gave up after {consecutive_errors} backend errors: {msg}");
                        persist(LogLine::Aborted { reason: reason.clone() })?;
                        run.aborted = Some(reason);
                        break;
                    }
                }
                Err(AttemptError::Fatal(reason)) => {
                    log::error!("{} attempt {index}: {reason}", problem.id);
                    persist(LogLine::Aborted { reason: reason.clone() })?;
                    run.aborted = Some(reason);
                    break;
                }
            }
        }
        Ok(run)
    }

    fn attempt(
        &self,
        problem: &Problem,
        index: usize,
        prev: Option<&AttemptRecord>,
    ) -> Result<AttemptRecord, AttemptError> {
        let cfg = &self.config;
        let params = &cfg.completion;
        let round = plan_round(index, cfg.effective_k())?;
        let mut fingerprints = Vec::new();
        let mut timing = StageTiming::default();

        let started = Instant::now();
        let informal_proof = match cfg.informal_source {
            InformalSource::Human => problem
                .human_informal_proof
                .clone()
                .filter(|p| !p.trim().is_empty())
                .ok_or_else(|| AttemptError::Fatal("problem has no human informal proof".into()))?,
            InformalSource::Model => match (round.kind, prev) {
                (RoundKind::Refine, Some(p)) => p.informal_proof.clone(),
                _ => {
                    let prompt = cfg.prompts.informal_prompt(&problem.informal_statement);
                    let messages = cfg.prompts.initial_transcript(&prompt)?;
                    fingerprints.push(fingerprint(&messages, params));
                    self.llm.complete(&messages, params)?
                }
            },
        };
        timing.informal_ms = millis(started);

        let started = Instant::now();
        let prompt = cfg
            .prompts
            .formal_prompt(&problem.informal_statement, &informal_proof, &problem.formal_statement);
        let refinement = match round.kind {
            RoundKind::Refine => prev.and_then(|p| p.feedback_for_next.as_ref().map(|f| (p.previous_response(), f))),
            RoundKind::Initial => None,
        };
        let (formal_request, feedback_sent) = match refinement {
            Some((previous, feedback)) => (
                cfg.prompts.refine_transcript(&prompt, previous, feedback)?,
                Some(feedback.clone()),
            ),
            None => (cfg.prompts.initial_transcript(&prompt)?, None),
        };
        fingerprints.push(fingerprint(&formal_request, params));
        let raw_formal_proof = self.llm.complete(&formal_request, params)?;
        timing.formal_ms = millis(started);

        let started = Instant::now();
        let candidate = assemble_candidate(&problem.formal_statement, &raw_formal_proof);
        let validity = check_validity(&candidate);
        let mut validated_proof = None;
        let mut substitutions = BTreeMap::new();
        let mut outcome = None;
        let mut error = None;
        let verdict = match parse_proof(&candidate) {
            Err(e) => {
                error = Some(e.to_string());
                AttemptVerdict::ParseFailed
            }
            Ok(script) => {
                let mut session =
                    ProverSession::open(self.prover.as_ref(), &problem.id, &problem.formal_statement, cfg.timeouts.clone())?;
                let result = cfg.tool_correction().validate_proof(&mut session, &script)?;
                session.close();
                substitutions = result.substitutions();
                validated_proof = Some(
                    render_with_markers(&script, &substitutions)
                        .map_err(|e| AttemptError::Fatal(e.to_string()))?,
                );
                let v = result.verdict.into();
                outcome = Some(result);
                v
            }
        };
        timing.validation_ms = millis(started);

        let solved = verdict == AttemptVerdict::Success && !validity.has_cheating;
        let feedback_for_next = (!solved && cfg.cc_enabled).then(|| {
            let cap = cfg.feedback_cap;
            match (verdict, &outcome) {
                (AttemptVerdict::ParseFailed, _) => ErrorFeedback::from_text(
                    &format!("The proof could not be parsed: {}.", error.as_deref().unwrap_or("")),
                    cap,
                    None,
                ),
                (AttemptVerdict::Success, _) => {
                    let words: Vec<&str> = validity.offending_keywords.iter().map(|(w, _)| w.as_str()).collect();
                    ErrorFeedback::from_text(
                        &format!(
                            "The proof is not accepted because it skips goals with: {}. Replace each with a real proof.",
                            words.join(", ")
                        ),
                        cap,
                        None,
                    )
                }
                (_, Some(o)) => format_feedback(o, cap).expect("outcome is a failure"),
                (_, None) => unreachable!("validated verdicts carry an outcome"),
            }
        });

        Ok(AttemptRecord {
            problem_id: problem.id.clone(),
            attempt_index: index,
            round,
            informal_proof,
            raw_formal_proof,
            candidate,
            validated_proof,
            verdict,
            error,
            validity,
            substitutions,
            solved,
            feedback_sent,
            feedback_for_next,
            formal_request,
            llm_fingerprints: fingerprints,
            outcome,
            timing,
        })
    }

    /// Starts a new run in `out`, which must not already hold one.
    pub fn run_suite(&self, problems: &[Problem], out: &Path) -> Result<SuiteReport, HarnessError> {
        validate_suite(problems)?;
        let store = RunStore::create(out, &self.config, problems)?;
        self.execute(problems, &store)
    }

    /// Continues the run in `dir`, skipping persisted attempts.
    pub fn resume(&self, dir: &Path) -> Result<SuiteReport, HarnessError> {
        let store = RunStore::open(dir, &self.config.fingerprint())?;
        let problems = store.problems()?;
        validate_suite(&problems)?;
        self.execute(&problems, &store)
    }

    fn execute(&self, problems: &[Problem], store: &RunStore) -> Result<SuiteReport, HarnessError> {
        let workers = self
            .config
            .workers
            .min(self.llm.max_concurrency().unwrap_or(usize::MAX))
            .clamp(1, problems.len());
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<ProblemRun>>> = Mutex::new(vec![None; problems.len()]);
        let failure: Mutex<Option<HarnessError>> = Mutex::new(None);

        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(problem) = problems.get(i) else { break };
                    let run = store
                        .load(&problem.id)
                        .map(|lines| ProblemRun::from_log(lines, !self.control.retry_aborted))
                        .and_then(|prior| self.drive(problem, prior, Some(store)));
                    match run {
                        Ok(run) => results.lock().unwrap()[i] = Some(run),
                        Err(e) => {
                            failure.lock().unwrap().get_or_insert(e);
                            self.control.cancel.store(true, Ordering::SeqCst);
                        }
                    }
                });
            }
        });

        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        let runs = results.into_inner().unwrap();
        let report = SuiteReport::build(self.config.attempts, problems, &runs);
        store.write_report(&report)?;
        Ok(report)
    }
}

/// Rebuilds the report of a run directory from its logs alone.
pub fn report_from_dir(dir: &Path) -> Result<SuiteReport, HarnessError> {
    let config = RunStore::load_config(dir)?;
    let store = RunStore::open(dir, &config.fingerprint())?;
    let problems = store.problems()?;
    let runs = problems
        .iter()
        .map(|p| store.load(&p.id).map(|l| Some(ProblemRun::from_log(l, true))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport::build(config.attempts, &problems, &runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_assembly() {
        let stmt = "theorem t: \"P\"";
        assert_eq!(assemble_candidate(stmt, "by simp"), "theorem t: \"P\"\nby simp");
        assert_eq!(
            assemble_candidate(stmt, "  have \"Q\" by auto\n  show ?thesis by simp\nqed"),
            "theorem t: \"P\"\nproof -\nhave \"Q\" by auto\n  show ?thesis by simp\nqed"
        );
        let full = "theorem t: \"P\"\nproof -\n  show ?thesis by simp\nqed";
        assert_eq!(assemble_candidate(stmt, full), full);
        let fenced = format!("Here it is:\n```isabelle\n{full}\n```\nDone.");
        assert_eq!(assemble_candidate(stmt, &fenced), full);
        assert_eq!(assemble_candidate(stmt, "proof -\nqed"), "theorem t: \"P\"\nproof -\nqed");
    }

    #[test]
    fn fingerprint_ignores_operational_fields() {
        let a = RunConfig::default();
        let b = RunConfig {
            workers: 9,
            max_requests: Some(3),
            ..RunConfig::default()
        };
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = RunConfig { k: 4, ..RunConfig::default() };
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { attempts: 0, ..Default::default() }.validate().is_err());
        let mut c = RunConfig::default();
        c.completion.temperature = 3.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_defaults_from_partial_json() {
        let c: RunConfig = serde_json::from_str(r#"{"attempts": 10, "cc_enabled": false}"#).unwrap();
        assert_eq!(c.attempts, 10);
        assert_eq!(c.k, 5);
        assert_eq!(c.effective_k(), 1);
        assert_eq!(c.completion.temperature, 0.7);
    }

    #[test]
    fn suite_validation() {
        assert!(matches!(validate_suite(&[]), Err(HarnessError::EmptySuite)));
        let p = Problem {
            id: "a".into(),
            split: Split::Valid,
            formal_statement: "theorem a: \"True\"".into(),
            informal_statement: String::new(),
            human_informal_proof: None,
        };
        assert!(matches!(
            validate_suite(&[p.clone(), p.clone()]),
            Err(HarnessError::DuplicateId(_))
        ));
        let blank = Problem {
            formal_statement: " ".into(),
            ..p
        };
        assert!(matches!(validate_suite(&[blank]), Err(HarnessError::InvalidProblem { .. })));
    }

    #[test]
    fn split_aliases() {
        let p: Problem =
            serde_json::from_str(r#"{"id":"x","split":"validation","formal_statement":"theorem x: \"A\""}"#).unwrap();
        assert_eq!(p.split, Split::Valid);
    }
}
