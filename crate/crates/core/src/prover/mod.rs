//! Stateful prover sessions.
//!
//! A [`ProverSession`] is the single-owner handle that the validation loop
//! drives one tactic at a time. The actual checking is delegated to a
//! [`ProverConnection`] obtained from a [`ProverBackend`]; two backends ship
//! with the crate: the deterministic [`scripted::ScriptedProver`] and the
//! socket-based [`bridge::BridgeProver`].

pub mod bridge;
pub mod scripted;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bridge::BridgeProver;
pub use scripted::{ScriptedProver, ScriptedProverRules};

/// Goal state reported once every goal has been discharged.
pub const NO_GOALS: &str = "no goals";

/// Error text of the synthetic reply produced when a step exceeds its budget.
pub const TIMEOUT_ERROR: &str = "timeout";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverReply {
    pub error: Option<String>,
    pub tactic_state: String,
}

impl ProverReply {
    pub fn ok(tactic_state: impl Into<String>) -> Self {
        Self {
            error: None,
            tactic_state: tactic_state.into(),
        }
    }

    pub fn err(error: impl Into<String>) -> Self {
        Self {
            error: Some(error.into()),
            tactic_state: String::new(),
        }
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }

    /// True for an error-free reply that closes the proof.
    pub fn is_complete(&self) -> bool {
        self.error.is_none() && self.tactic_state == NO_GOALS
    }
}

#[derive(Debug, Error)]
pub enum ProverError {
    #[error("prover bridge unavailable: {0}")]
    BridgeUnavailable(String),
    #[error("prover rejected the statement: {0}")]
    BadStatement(String),
    #[error("session is closed")]
    SessionClosed,
    #[error("step exceeded its time budget")]
    Timeout,
    #[error("bridge protocol error: {0}")]
    Protocol(String),
}

/// Per-step wall-clock budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepTimeouts {
    pub sledgehammer_secs: f64,
    pub default_secs: f64,
}

impl Default for StepTimeouts {
    fn default() -> Self {
        Self {
            sledgehammer_secs: 120.0,
            default_secs: 10.0,
        }
    }
}

impl StepTimeouts {
    pub fn budget_for(&self, tactic: &str) -> Duration {
        let secs = if tactic.contains("sledgehammer") {
            self.sledgehammer_secs
        } else {
            self.default_secs
        };
        Duration::from_secs_f64(secs.max(0.0))
    }
}

/// Source of prover connections, one per problem attempt.
pub trait ProverBackend: Send + Sync {
    /// Opens a connection positioned right after `statement`.
    fn connect(
        &self,
        problem_id: &str,
        statement: &str,
    ) -> Result<Box<dyn ProverConnection>, ProverError>;
}

/// One live prover process or remote session.
///
/// A failed submission must leave the logical proof state unchanged, so the
/// caller can try alternative tactics against the same goal.
pub trait ProverConnection: Send {
    /// Returns `Err(ProverError::Timeout)` when `budget` is exceeded.
    fn submit(&mut self, tactic: &str, budget: Duration) -> Result<ProverReply, ProverError>;

    fn close(&mut self) {}
}

pub struct ProverSession {
    pub problem_id: String,
    pub statement: String,
    step_log: Vec<(String, ProverReply)>,
    open: bool,
    finished: bool,
    timeouts: StepTimeouts,
    conn: Box<dyn ProverConnection>,
}

impl std::fmt::Debug for ProverSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProverSession")
            .field("problem_id", &self.problem_id)
            .field("steps", &self.step_log.len())
            .field("open", &self.open)
            .finish()
    }
}

impl ProverSession {
    pub fn open(
        backend: &dyn ProverBackend,
        problem_id: &str,
        statement: &str,
        timeouts: StepTimeouts,
    ) -> Result<Self, ProverError> {
        if statement.trim().is_empty() {
            return Err(ProverError::BadStatement("empty statement".into()));
        }
        let conn = backend.connect(problem_id, statement)?;
        Ok(Self {
            problem_id: problem_id.to_string(),
            statement: statement.to_string(),
            step_log: Vec::new(),
            open: true,
            finished: false,
            timeouts,
            conn,
        })
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn step_log(&self) -> &[(String, ProverReply)] {
        &self.step_log
    }

    /// Submits one tactic. A timeout is reported as a failing reply whose
    /// error is [`TIMEOUT_ERROR`].
    pub fn run_tac(&mut self, tactic: &str) -> Result<ProverReply, ProverError> {
        if !self.open || self.finished {
            return Err(ProverError::SessionClosed);
        }
        let reply = match self.conn.submit(tactic, self.timeouts.budget_for(tactic)) {
            Ok(reply) => reply,
            Err(ProverError::Timeout) => ProverReply::err(TIMEOUT_ERROR),
            Err(e) => return Err(e),
        };
        if reply.is_complete() {
            self.finished = true;
        }
        self.step_log.push((tactic.to_string(), reply.clone()));
        Ok(reply)
    }

    /// Idempotent; the step log is kept for reporting.
    pub fn close(&mut self) {
        if self.open {
            self.conn.close();
            self.open = false;
        }
    }
}

impl Drop for ProverSession {
    fn drop(&mut self) {
        self.close();
    }
}
