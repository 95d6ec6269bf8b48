use std::net::TcpListener;
use std::sync::Arc;

use proptest::prelude::*;

use proof_refine::prover::scripted::ScriptedRule;
use proof_refine::prover::{
    bridge, BridgeProver, ProverError, ProverReply, ProverSession, ScriptedProver, ScriptedProverRules, StepTimeouts,
};

const RULES: &str = r#"{"rules": [
    {"state_contains": "have \"a\"", "tactic_regex": "^by auto$", "reply": {"error": null, "tactic_state": "{tactic}"}},
    {"state_contains": "have \"a\"", "tactic_regex": ".", "reply": {"error": "Failed to finish proof", "tactic_state": ""}},
    {"state_contains": "show ?thesis", "tactic_regex": "^by simp$", "reply": {"error": null, "tactic_state": "no goals"}}
  ],
  "default": {"error": null, "tactic_state": "{state}\n{tactic}"}}"#;

fn scripted() -> Arc<ScriptedProver> {
    Arc::new(ScriptedProver::from_json(RULES).unwrap())
}

fn drive(session: &mut ProverSession) -> Vec<ProverReply> {
    ["have \"a\"", "by simp", "by auto", "show ?thesis", "by simp"]
        .iter()
        .map(|t| session.run_tac(t).unwrap())
        .collect()
}

#[test]
fn bridge_serves_the_same_replies_as_the_backend() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    bridge::spawn_server(listener, scripted());

    let remote = BridgeProver::new(addr);
    let mut over_wire = ProverSession::open(&remote, "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();
    let local = scripted();
    let mut direct = ProverSession::open(local.as_ref(), "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();

    let a = drive(&mut over_wire);
    let b = drive(&mut direct);
    assert_eq!(a, b);
    assert!(a[1].is_failure());
    assert!(a.last().unwrap().is_complete());
    assert_eq!(over_wire.step_log(), direct.step_log());
}

#[test]
fn dead_bridge_is_reported_as_unavailable() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let remote = BridgeProver::new(format!("127.0.0.1:{port}"));
    let err = ProverSession::open(&remote, "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap_err();
    assert!(matches!(err, ProverError::BridgeUnavailable(_)), "{err:?}");
}

#[test]
fn no_submission_after_completion_or_close() {
    let p = scripted();
    let mut s = ProverSession::open(p.as_ref(), "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();
    drive(&mut s);
    assert!(matches!(s.run_tac("by simp"), Err(ProverError::SessionClosed)));
    let mut s = ProverSession::open(p.as_ref(), "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();
    s.run_tac("have \"a\"").unwrap();
    s.close();
    assert!(matches!(s.run_tac("by auto"), Err(ProverError::SessionClosed)));
    assert_eq!(s.step_log().len(), 1);
}

fn reply_strategy() -> impl Strategy<Value = ProverReply> {
    prop_oneof![
        Just(ProverReply::ok("no goals")),
        Just(ProverReply::ok("{tactic}")),
        Just(ProverReply::ok("{state}\n{tactic}")),
        "[a-z]{1,6}".prop_map(ProverReply::err),
    ]
}

fn rules_strategy() -> impl Strategy<Value = ScriptedProverRules> {
    let rule = (
        prop::sample::select(vec!["", "have", "show", "by", "P"]),
        prop::sample::select(vec![".", "^by", "auto", "^have", "^\\.$"]),
        reply_strategy(),
    )
        .prop_map(|(sc, re, reply)| ScriptedRule {
            state_contains: sc.to_string(),
            tactic_regex: re.to_string(),
            reply,
            delay_ms: 0,
            note: None,
        });
    (prop::collection::vec(rule, 0..6), reply_strategy()).prop_map(|(rules, default)| ScriptedProverRules {
        rules,
        default,
        reject_statement_contains: Vec::new(),
    })
}

fn tactics_strategy() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(
        prop::sample::select(vec!["have \"x\"", "show ?thesis", "by auto", "by simp", ".", "then"]),
        1..12,
    )
}

/// Submits until the session refuses further input.
fn log_of(rules: &ScriptedProverRules, tactics: &[&str]) -> Vec<(String, ProverReply)> {
    let p = ScriptedProver::new(rules.clone()).unwrap();
    let mut s = ProverSession::open(&p, "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();
    for t in tactics {
        if s.run_tac(t).is_err() {
            break;
        }
    }
    s.step_log().to_vec()
}

proptest! {
    #[test]
    fn scripted_prover_is_deterministic(rules in rules_strategy(), tactics in tactics_strategy()) {
        prop_assert_eq!(log_of(&rules, &tactics), log_of(&rules, &tactics));
    }

    #[test]
    fn failures_leave_the_state_untouched(rules in rules_strategy(), tactics in tactics_strategy()) {
        let p = ScriptedProver::new(rules).unwrap();
        let mut s = ProverSession::open(&p, "p", "theorem p: \"P\"", StepTimeouts::default()).unwrap();
        for t in tactics {
            let Ok(first) = s.run_tac(t) else { break };
            if first.is_failure() {
                let again = s.run_tac(t).unwrap();
                prop_assert_eq!(first, again);
            }
        }
    }
}
