//! Deterministic rule-table prover used as a test oracle and for replaying
//! recorded interactions.
//!
//! Each session tracks a goal-state string, initially the theorem statement.
//! A submission is matched against the rule table in order; the first rule
//! whose `state_contains` is a substring of the current state and whose
//! `tactic_regex` matches the tactic supplies the reply. Replies may use the
//! placeholders `{state}` (current state) and `{tactic}` (submitted text).
//! Only error-free replies move the state; failures leave it untouched.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ProverBackend, ProverConnection, ProverError, ProverReply};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedRule {
    #[serde(default)]
    pub state_contains: String,
    pub tactic_regex: String,
    pub reply: ProverReply,
    /// Simulated checking time, compared against the step budget.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub delay_ms: u64,
    /// Free-form provenance, e.g. marking an error text as synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedProverRules {
    pub rules: Vec<ScriptedRule>,
    pub default: ProverReply,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reject_statement_contains: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RulesError {
    #[error("cannot read rules: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed rules document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rule {index}: invalid tactic_regex: {source}")]
    Regex {
        index: usize,
        #[source]
        source: regex::Error,
    },
}

#[derive(Debug)]
struct Compiled {
    rule: ScriptedRule,
    regex: Regex,
}

#[derive(Debug)]
struct RuleTable {
    rules: Vec<Compiled>,
    default: ProverReply,
    reject: Vec<String>,
}

impl RuleTable {
    fn evaluate(&self, state: &str, tactic: &str) -> (ProverReply, Duration) {
        let (template, delay) = self
            .rules
            .iter()
            .find(|c| state.contains(&c.rule.state_contains) && c.regex.is_match(tactic))
            .map_or((&self.default, 0), |c| (&c.rule.reply, c.rule.delay_ms));
        let expand = |s: &str| s.replace("{state}", state).replace("{tactic}", tactic);
        let reply = ProverReply {
            error: template.error.as_deref().map(expand),
            tactic_state: expand(&template.tactic_state),
        };
        (reply, Duration::from_millis(delay))
    }
}

/// Immutable after construction; cloning shares the rule table.
#[derive(Debug, Clone)]
pub struct ScriptedProver {
    table: Arc<RuleTable>,
}

impl ScriptedProver {
    pub fn new(rules: ScriptedProverRules) -> Result<Self, RulesError> {
        let compiled = rules
            .rules
            .into_iter()
            .enumerate()
            .map(|(index, rule)| {
                Regex::new(&rule.tactic_regex)
                    .map(|regex| Compiled { rule, regex })
                    .map_err(|source| RulesError::Regex { index, source })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            table: Arc::new(RuleTable {
                rules: compiled,
                default: rules.default,
                reject: rules.reject_statement_contains,
            }),
        })
    }

    pub fn from_json(doc: &str) -> Result<Self, RulesError> {
        Self::new(serde_json::from_str(doc)?)
    }

    pub fn load(path: &Path) -> Result<Self, RulesError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Pure transition function: `(state, tactic) -> (reply, simulated delay)`.
    pub fn evaluate(&self, state: &str, tactic: &str) -> (ProverReply, Duration) {
        self.table.evaluate(state, tactic)
    }
}

impl ProverBackend for ScriptedProver {
    fn connect(
        &self,
        _problem_id: &str,
        statement: &str,
    ) -> Result<Box<dyn ProverConnection>, ProverError> {
        if let Some(bad) = self.table.reject.iter().find(|r| statement.contains(r.as_str())) {
            return Err(ProverError::BadStatement(format!(
                "statement matches rejected pattern {bad:?}"
            )));
        }
        Ok(Box::new(ScriptedConnection {
            table: Arc::clone(&self.table),
            state: statement.to_string(),
        }))
    }
}

struct ScriptedConnection {
    table: Arc<RuleTable>,
    state: String,
}

impl ProverConnection for ScriptedConnection {
    fn submit(&mut self, tactic: &str, budget: Duration) -> Result<ProverReply, ProverError> {
        let (reply, delay) = self.table.evaluate(&self.state, tactic);
        if delay > budget {
            return Err(ProverError::Timeout);
        }
        if reply.error.is_none() {
            self.state = reply.tactic_state.clone();
        }
        Ok(reply)
    }
}
