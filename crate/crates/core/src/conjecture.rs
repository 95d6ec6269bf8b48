//! Chat transcripts for initial and refinement rounds, prover feedback, and
//! the patch schedule that decides which rounds start fresh.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tool_correction::{ProofOutcome, Verdict};

pub const SYSTEM_TEMPLATE: &str = include_str!("../templates/system.txt");
/// Refinement instruction; `{}` is replaced by the feedback text.
pub const REFINE_TEMPLATE: &str = include_str!("../templates/refine.txt");
pub const FORMAL_EXAMPLES: &str = include_str!("../templates/formal_examples.txt");
pub const INFORMAL_EXAMPLES: &str = include_str!("../templates/informal_examples.txt");

pub const DEFAULT_FEEDBACK_CAP: usize = 4000;

pub const INCOMPLETE_FEEDBACK: &str =
    "The proof was accepted step-by-step but did not close all goals.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundKind {
    Initial,
    Refine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundPlan {
    pub attempt_index: usize,
    pub kind: RoundKind,
    pub patch_index: usize,
    pub position_in_patch: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorFeedback {
    pub text: String,
    pub truncated: bool,
    pub source_step_index: Option<usize>,
}

impl ErrorFeedback {
    /// Feedback from free text, clipped to `cap` characters.
    pub fn from_text(text: &str, cap: usize, source_step_index: Option<usize>) -> Self {
        let (text, truncated) = clip(text, cap);
        Self {
            text,
            truncated,
            source_step_index,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConjectureError {
    #[error("patch size must be at least 1")]
    InvalidK,
    #[error("attempt count must be at least 1")]
    InvalidAttempts,
    #[error("prompt sample is empty")]
    EmptyPrompt,
    #[error("previous response is empty")]
    EmptyPrevious,
    #[error("outcome is a success; there is nothing to feed back")]
    NotAFailure,
}

pub fn plan_round(attempt_index: usize, k: usize) -> Result<RoundPlan, ConjectureError> {
    if k == 0 {
        return Err(ConjectureError::InvalidK);
    }
    let position_in_patch = attempt_index % k;
    Ok(RoundPlan {
        attempt_index,
        kind: if position_in_patch == 0 {
            RoundKind::Initial
        } else {
            RoundKind::Refine
        },
        patch_index: attempt_index / k,
        position_in_patch,
    })
}

pub fn patch_count(attempts: usize, k: usize) -> Result<usize, ConjectureError> {
    if k == 0 {
        return Err(ConjectureError::InvalidK);
    }
    if attempts == 0 {
        return Err(ConjectureError::InvalidAttempts);
    }
    Ok(attempts.div_ceil(k))
}

/// Prompt texts used by a run. Defaults are the shipped assets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplates {
    pub system: String,
    pub refine: String,
    pub formal_examples: String,
    pub informal_examples: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            system: SYSTEM_TEMPLATE.to_string(),
            refine: REFINE_TEMPLATE.to_string(),
            formal_examples: FORMAL_EXAMPLES.to_string(),
            informal_examples: INFORMAL_EXAMPLES.to_string(),
        }
    }
}

impl PromptTemplates {
    pub fn initial_transcript(&self, prompt_sample: &str) -> Result<Vec<ChatMessage>, ConjectureError> {
        if prompt_sample.is_empty() {
            return Err(ConjectureError::EmptyPrompt);
        }
        Ok(vec![
            ChatMessage::new(Role::System, self.system.clone()),
            ChatMessage::new(Role::User, prompt_sample),
        ])
    }

    pub fn refine_transcript(
        &self,
        prompt_sample: &str,
        previous_response: &str,
        feedback: &ErrorFeedback,
    ) -> Result<Vec<ChatMessage>, ConjectureError> {
        let mut messages = self.initial_transcript(prompt_sample)?;
        if previous_response.is_empty() {
            return Err(ConjectureError::EmptyPrevious);
        }
        messages.push(ChatMessage::new(Role::Assistant, previous_response));
        messages.push(ChatMessage::new(
            Role::User,
            self.refine.replacen("{}", &feedback.text, 1),
        ));
        Ok(messages)
    }

    /// User prompt for the formal-sketch stage.
    pub fn formal_prompt(&self, informal_statement: &str, informal_proof: &str, formal_statement: &str) -> String {
        format!(
            "{}\n\nInformal:\n(*### Problem\n\n{}\n\n### Solution\n\n{}*)\n\nFormal:\n{}\n",
            self.formal_examples,
            informal_statement.trim(),
            informal_proof.trim(),
            formal_statement.trim_end()
        )
    }

    /// User prompt for the informal-proof stage.
    pub fn informal_prompt(&self, informal_statement: &str) -> String {
        format!(
            "{}\n\n### Problem\n\n{}\n\n### Solution\n",
            self.informal_examples,
            informal_statement.trim()
        )
    }
}

pub fn build_initial_transcript(prompt_sample: &str) -> Result<Vec<ChatMessage>, ConjectureError> {
    PromptTemplates::default().initial_transcript(prompt_sample)
}

pub fn build_refine_transcript(
    prompt_sample: &str,
    previous_response: &str,
    feedback: &ErrorFeedback,
) -> Result<Vec<ChatMessage>, ConjectureError> {
    PromptTemplates::default().refine_transcript(prompt_sample, previous_response, feedback)
}

/// Keeps the first `cap` characters.
fn clip(text: &str, cap: usize) -> (String, bool) {
    match text.char_indices().nth(cap) {
        Some((cut, _)) => (text[..cut].to_string(), true),
        None => (text.to_string(), false),
    }
}

pub fn format_feedback(outcome: &ProofOutcome, cap: usize) -> Result<ErrorFeedback, ConjectureError> {
    match outcome.verdict {
        Verdict::Success => Err(ConjectureError::NotAFailure),
        Verdict::ProofIncomplete => {
            let (text, truncated) = clip(INCOMPLETE_FEEDBACK, cap);
            Ok(ErrorFeedback {
                text,
                truncated,
                source_step_index: None,
            })
        }
        Verdict::TacticFailed => {
            let step = outcome.failed_step();
            let tactic = step.map_or("", |s| s.original_tactic.as_str());
            let error = step
                .and_then(|s| s.original_reply.error.as_deref())
                .or_else(|| outcome.failing_reply.as_ref().and_then(|r| r.error.as_deref()))
                .unwrap_or("");
            let (text, truncated) = clip(&format!("{tactic}\n{error}"), cap);
            Ok(ErrorFeedback {
                text,
                truncated,
                source_step_index: step.map(|s| s.step_index),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prover::ProverReply;
    use crate::tool_correction::{StepOutcome, StepResult};

    fn failed(error: &str) -> ProofOutcome {
        let reply = ProverReply::err(error);
        ProofOutcome {
            verdict: Verdict::TacticFailed,
            step_outcomes: vec![StepOutcome {
                step_index: 4,
                original_tactic: "by simp".into(),
                original_reply: reply.clone(),
                attempted: vec![],
                result: StepResult::Failed,
                repair: None,
            }],
            failing_reply: Some(reply),
        }
    }

    #[test]
    fn plan_examples() {
        let p = plan_round(0, 5).unwrap();
        assert_eq!((p.kind, p.patch_index), (RoundKind::Initial, 0));
        let p = plan_round(5, 5).unwrap();
        assert_eq!((p.kind, p.patch_index), (RoundKind::Initial, 1));
        let p = plan_round(7, 5).unwrap();
        assert_eq!((p.kind, p.patch_index, p.position_in_patch), (RoundKind::Refine, 1, 2));
        assert_eq!(plan_round(3, 0), Err(ConjectureError::InvalidK));
    }

    #[test]
    fn patch_examples() {
        assert_eq!(patch_count(200, 5), Ok(40));
        assert_eq!(patch_count(100, 5), Ok(20));
        assert_eq!(patch_count(7, 3), Ok(3));
        assert_eq!(patch_count(7, 0), Err(ConjectureError::InvalidK));
        assert_eq!(patch_count(0, 3), Err(ConjectureError::InvalidAttempts));
    }

    #[test]
    fn initial_transcript_shape() {
        let t = build_initial_transcript("prompt").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].role, Role::System);
        assert_eq!(t[0].content, SYSTEM_TEMPLATE);
        assert_eq!(t[1], ChatMessage::new(Role::User, "prompt"));
        assert_eq!(build_initial_transcript(""), Err(ConjectureError::EmptyPrompt));
    }

    #[test]
    fn refine_transcript_shape() {
        let fb = ErrorFeedback {
            text: String::new(),
            truncated: false,
            source_step_index: None,
        };
        let t = build_refine_transcript("prompt", "proof -\nqed", &fb).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t[2], ChatMessage::new(Role::Assistant, "proof -\nqed"));
        assert!(t[3].content.ends_with("proof -\n"));
        assert!(t[3].content.contains("formal proof.\n .\n"));
        assert_eq!(
            build_refine_transcript("prompt", "", &fb),
            Err(ConjectureError::EmptyPrevious)
        );
        assert_eq!(
            build_refine_transcript("", "x", &fb),
            Err(ConjectureError::EmptyPrompt)
        );
    }

    #[test]
    fn feedback_braces_are_not_reinterpreted() {
        let fb = ErrorFeedback {
            text: "{}{}".into(),
            truncated: false,
            source_step_index: None,
        };
        let t = build_refine_transcript("p", "x", &fb).unwrap();
        assert_eq!(t[3].content, REFINE_TEMPLATE.replacen("{}", "{}{}", 1));
    }

    #[test]
    fn feedback_for_failure() {
        let fb = format_feedback(&failed("Failed to finish proof"), 4000).unwrap();
        assert_eq!(fb.text, "by simp\nFailed to finish proof");
        assert!(!fb.truncated);
        assert_eq!(fb.source_step_index, Some(4));
    }

    #[test]
    fn feedback_is_clipped_from_the_front() {
        let fb = format_feedback(&failed(&"é".repeat(50)), 20).unwrap();
        assert!(fb.truncated);
        assert_eq!(fb.text.chars().count(), 20);
        assert!(fb.text.starts_with("by simp\n"));
    }

    #[test]
    fn feedback_for_incomplete_and_success() {
        let mut o = failed("x");
        o.verdict = Verdict::ProofIncomplete;
        o.failing_reply = None;
        assert_eq!(format_feedback(&o, 4000).unwrap().text, INCOMPLETE_FEEDBACK);
        o.verdict = Verdict::Success;
        assert_eq!(format_feedback(&o, 4000), Err(ConjectureError::NotAFailure));
    }

    #[test]
    fn prompt_layouts() {
        let t = PromptTemplates {
            formal_examples: "EX".into(),
            informal_examples: "IX".into(),
            ..Default::default()
        };
        assert_eq!(
            t.formal_prompt("Stmt", "Pf", "theorem t: \"P\""),
            "EX\n\nInformal:\n(*### Problem\n\nStmt\n\n### Solution\n\nPf*)\n\nFormal:\ntheorem t: \"P\"\n"
        );
        assert_eq!(t.informal_prompt("Stmt"), "IX\n\n### Problem\n\nStmt\n\n### Solution\n");
    }
}
