use std::process::Command;

use proof_refine::fixtures::{load_fixture, TRANSCRIPT_FILE};
use proof_refine::harness::{LlmBackendConfig, ProverBackendConfig, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proof-refine"))
}

#[test]
fn run_resume_and_report_on_a_fixture() {
    let f = load_fixture("imo_1981_p6").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        prover_backend: Some(ProverBackendConfig::Scripted {
            rules: f.dir.join("rules.json"),
        }),
        llm_backend: Some(LlmBackendConfig::Scripted {
            transcript: f.dir.join(TRANSCRIPT_FILE),
        }),
        ..f.config()
    };
    let config_path = dir.path().join("config.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let problems = dir.path().join("problems.jsonl");
    std::fs::write(&problems, serde_json::to_string(&f.problem).unwrap() + "\n").unwrap();
    let out = dir.path().join("run");

    let status = bin()
        .args(["run", "--problems"])
        .arg(&problems)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(String::from_utf8_lossy(&status.stdout).contains("1/1 solved"));

    let again = bin().arg("run").arg("--config").arg(&config_path).arg("--resume").arg(&out).output().unwrap();
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));

    let report = bin().arg("report").arg(&out).output().unwrap();
    assert!(report.status.success());
    let json: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(json["problems"][0]["first_solved_attempt"], 0);
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), report.stdout);

    let clash = bin()
        .args(["run", "--problems"])
        .arg(&problems)
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(clash.status.code(), Some(2));
}

#[test]
fn check_proof_reports_repairs() {
    let f = load_fixture("imo_1981_p6").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let statement = dir.path().join("statement.thy");
    std::fs::write(&statement, &f.problem.formal_statement).unwrap();
    let proof = dir.path().join("proof.thy");
    std::fs::write(&proof, &f.responses().unwrap()[0].1).unwrap();
    let rules = f.dir.join("rules.json");

    let with_tc = bin()
        .args(["check-proof", "--tc", "--statement"])
        .arg(&statement)
        .arg("--proof")
        .arg(&proof)
        .arg("--rules")
        .arg(&rules)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&with_tc.stdout);
    assert!(with_tc.status.success(), "{stdout}");
    assert!(stdout.contains("repaired -> by auto"));
    assert!(stdout.contains("by auto [ATPWithTC]"));

    let without = bin()
        .args(["check-proof", "--statement"])
        .arg(&statement)
        .arg("--proof")
        .arg(&proof)
        .arg("--rules")
        .arg(&rules)
        .output()
        .unwrap();
    assert_eq!(without.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&without.stdout).contains("verdict: TacticFailed"));
}

#[test]
fn malformed_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, "{\"attempts\": 0}").unwrap();
    let out = bin().arg("run").arg("--problems").arg(&config).arg("--config").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
