//! Step-wise validation with heuristic tool substitution.
//!
//! Every step of a [`ProofScript`] is submitted in order. When a step fails
//! and is eligible (it invokes sledgehammer, or tool correction is enabled and
//! the step is a `by ...` method or `.`), the tools are tried in list order
//! against the same goal until one is accepted. The proof fails at the first
//! step that stays broken and succeeds as soon as a reply reports no goals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::isar::{ProofScript, TacticStep};
use crate::prover::{ProverError, ProverReply, ProverSession};

/// The heuristic tools, in the order they are tried.
pub const DEFAULT_TOOLS: [&str; 12] = [
    "by auto",
    "by arith",
    "by blast",
    "by simp",
    "by fastforce",
    "by force",
    "by eval",
    "by presburger",
    "by sos",
    "by linarith",
    "by (auto simp: field_simps)",
    "sledgehammer",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToolList(pub Vec<String>);

impl Default for ToolList {
    fn default() -> Self {
        Self(DEFAULT_TOOLS.iter().map(|t| t.to_string()).collect())
    }
}

impl ToolList {
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepResult {
    PassedUnchanged,
    Repaired,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolAttempt {
    pub tactic: String,
    pub reply: ProverReply,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub step_index: usize,
    pub original_tactic: String,
    pub original_reply: ProverReply,
    /// Substitute tools submitted after the original failed.
    pub attempted: Vec<ToolAttempt>,
    #[serde(rename = "final")]
    pub result: StepResult,
    pub repair: Option<String>,
}

impl StepOutcome {
    /// The reply that decided the step.
    pub fn last_reply(&self) -> &ProverReply {
        self.attempted
            .last()
            .map_or(&self.original_reply, |a| &a.reply)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    TacticFailed,
    ProofIncomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofOutcome {
    pub verdict: Verdict,
    pub step_outcomes: Vec<StepOutcome>,
    /// Last reply of the unrepairable step; set iff the verdict is
    /// [`Verdict::TacticFailed`].
    pub failing_reply: Option<ProverReply>,
}

impl ProofOutcome {
    /// Step index to replacement tactic for every repaired step.
    pub fn substitutions(&self) -> BTreeMap<usize, String> {
        self.step_outcomes
            .iter()
            .filter_map(|o| o.repair.clone().map(|r| (o.step_index, r)))
            .collect()
    }

    pub fn failed_step(&self) -> Option<&StepOutcome> {
        self.step_outcomes
            .iter()
            .find(|o| o.result == StepResult::Failed)
    }
}

/// Whether a failing tactic may be replaced by tools.
pub fn is_eligible(tactic: &str, tc_enabled: bool) -> bool {
    let trimmed = tactic.trim();
    tactic.contains("sledgehammer") || (tc_enabled && (trimmed.starts_with("by") || trimmed == "."))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolCorrection {
    pub tools: ToolList,
    pub enabled: bool,
    /// Skip tools textually equal to the failed original. Changes the number
    /// of prover calls but never the verdict.
    pub skip_duplicates: bool,
}

impl Default for ToolCorrection {
    fn default() -> Self {
        Self {
            tools: ToolList::default(),
            enabled: true,
            skip_duplicates: true,
        }
    }
}

impl ToolCorrection {
    pub fn new(tools: ToolList, enabled: bool) -> Self {
        Self {
            tools,
            enabled,
            skip_duplicates: true,
        }
    }

    pub fn correct_step(
        &self,
        session: &mut ProverSession,
        step: &TacticStep,
    ) -> Result<StepOutcome, ProverError> {
        let original = step.text.as_str();
        let original_reply = session.run_tac(original)?;
        let mut outcome = StepOutcome {
            step_index: step.index,
            original_tactic: original.to_string(),
            original_reply,
            attempted: Vec::new(),
            result: StepResult::PassedUnchanged,
            repair: None,
        };
        if !outcome.original_reply.is_failure() {
            return Ok(outcome);
        }
        if is_eligible(original, self.enabled) {
            for tool in self.tools.iter() {
                if self.skip_duplicates && tool.trim() == original.trim() {
                    continue;
                }
                let reply = session.run_tac(tool)?;
                let ok = !reply.is_failure();
                outcome.attempted.push(ToolAttempt {
                    tactic: tool.to_string(),
                    reply,
                });
                if ok {
                    outcome.result = StepResult::Repaired;
                    outcome.repair = Some(tool.to_string());
                    return Ok(outcome);
                }
            }
        }
        outcome.result = StepResult::Failed;
        Ok(outcome)
    }

    pub fn validate_proof(
        &self,
        session: &mut ProverSession,
        script: &ProofScript,
    ) -> Result<ProofOutcome, ProverError> {
        let mut step_outcomes = Vec::with_capacity(script.steps.len());
        for step in &script.steps {
            let outcome = self.correct_step(session, step)?;
            let last = outcome.last_reply().clone();
            let failed = outcome.result == StepResult::Failed;
            step_outcomes.push(outcome);
            if failed {
                return Ok(ProofOutcome {
                    verdict: Verdict::TacticFailed,
                    step_outcomes,
                    failing_reply: Some(last),
                });
            }
            if last.is_complete() {
                return Ok(ProofOutcome {
                    verdict: Verdict::Success,
                    step_outcomes,
                    failing_reply: None,
                });
            }
        }
        Ok(ProofOutcome {
            verdict: Verdict::ProofIncomplete,
            step_outcomes,
            failing_reply: None,
        })
    }
}
