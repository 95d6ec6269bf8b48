use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use proof_refine::harness::{self, HarnessError, RunConfig, Runner, SuiteReport};
use proof_refine::isar::{check_validity, parse_proof, render_with_markers};
use proof_refine::prover::{bridge, BridgeProver, ProverBackend, ProverSession, ScriptedProver, StepTimeouts};
use proof_refine::tool_correction::{StepResult, ToolCorrection, ToolList, Verdict};

#[derive(Parser)]
#[command(name = "proof-refine", version, about = "Validate, repair and refine Isabelle proof sketches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a problem suite, or continue an interrupted run.
    Run {
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Continue the run stored in this directory.
        #[arg(long, conflicts_with = "out")]
        resume: Option<PathBuf>,
        /// Directory for the new run.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Re-run problems that an earlier invocation abandoned.
        #[arg(long)]
        retry_aborted: bool,
    },
    /// Rebuild and print the report of a run directory.
    Report { dir: PathBuf },
    /// Validate one proof step by step.
    CheckProof {
        #[arg(long)]
        statement: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        /// Enable tool correction.
        #[arg(long)]
        tc: bool,
        #[arg(long, required_unless_present = "bridge", conflicts_with = "bridge")]
        rules: Option<PathBuf>,
        #[arg(long)]
        bridge: Option<String>,
    },
    /// Print the step segmentation of a proof.
    Parse { file: PathBuf },
    /// Serve a scripted prover over the bridge protocol.
    Serve {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7766")]
        listen: String,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let config: RunConfig =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn print_report(report: &SuiteReport) {
    for (split, s) in &report.splits {
        println!(
            "{split:?}: {}/{} solved ({:.1}%)",
            s.solved,
            s.problems,
            100.0 * s.success_rate
        );
    }
    for p in report.problems.iter().filter(|p| p.aborted.is_some()) {
        println!("aborted {}: {}", p.id, p.aborted.as_deref().unwrap_or(""));
    }
    if !report.complete {
        println!("run incomplete; continue with --resume");
    }
}

fn report_status(report: &SuiteReport) -> ExitCode {
    if report.complete && !report.any_aborted() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(
    problems: Option<PathBuf>,
    config_path: PathBuf,
    resume: Option<PathBuf>,
    out: PathBuf,
    retry_aborted: bool,
) -> Result<ExitCode, Failure> {
    let config = load_config(&config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let control = harness::RunControl {
        retry_aborted,
        ..Default::default()
    };
    let report = match resume {
        Some(dir) => {
            let (prover, llm) = config.build_backends(base, Some(&dir))?;
            Runner::new(config, prover, llm)?.with_control(control).resume(&dir)?
        }
        None => {
            let problems = problems.ok_or_else(|| Failure::Config("--problems is required for a new run".into()))?;
            let problems = harness::load_problems(&problems)?;
            harness::validate_suite(&problems)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            let (prover, llm) = config.build_backends(base, Some(&out))?;
            Runner::new(config, prover, llm)?
                .with_control(control)
                .run_suite(&problems, &out)?
        }
    };
    print_report(&report);
    Ok(report_status(&report))
}

fn report(dir: PathBuf) -> Result<ExitCode, Failure> {
    let report = harness::report_from_dir(&dir)?;
    print!("{}", report.to_json());
    Ok(report_status(&report))
}

fn check_proof(
    statement: PathBuf,
    proof: PathBuf,
    tc: bool,
    rules: Option<PathBuf>,
    bridge: Option<String>,
) -> Result<ExitCode, Failure> {
    let statement = read(&statement)?;
    let text = read(&proof)?;
    let backend: Box<dyn ProverBackend> = match (rules, bridge) {
        (Some(r), _) => Box::new(ScriptedProver::load(&r).map_err(|e| Failure::Config(e.to_string()))?),
        (None, Some(addr)) => Box::new(BridgeProver::new(addr)),
        (None, None) => return Err(Failure::Config("need --rules or --bridge".into())),
    };
    let script = parse_proof(&text).map_err(|e| Failure::Runtime(format!("parse error: {e}")))?;
    let validity = check_validity(&text);
    let mut session = ProverSession::open(backend.as_ref(), "check", statement.trim_end(), StepTimeouts::default())
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let outcome = ToolCorrection::new(ToolList::default(), tc)
        .validate_proof(&mut session, &script)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    for step in &outcome.step_outcomes {
        let status = match step.result {
            StepResult::PassedUnchanged => "ok".to_string(),
            StepResult::Repaired => format!("repaired -> {}", step.repair.as_deref().unwrap_or("")),
            StepResult::Failed => format!(
                "FAILED: {}",
                step.last_reply().error.as_deref().unwrap_or("")
            ),
        };
        println!("[{:>3}] {:<60} {status}", step.step_index, step.original_tactic.replace('\n', " "));
    }
    println!("verdict: {:?}", outcome.verdict);
    for (word, offset) in &validity.offending_keywords {
        println!("cheating keyword {word:?} at byte {offset}");
    }
    let rendered = render_with_markers(&script, &outcome.substitutions()).map_err(|e| Failure::Runtime(e.to_string()))?;
    if !outcome.substitutions().is_empty() {
        println!("--- repaired proof ---\n{rendered}");
    }
    Ok(if outcome.verdict == Verdict::Success && !validity.has_cheating {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse(file: PathBuf) -> Result<ExitCode, Failure> {
    let text = read(&file)?;
    let script = parse_proof(&text).map_err(|e| Failure::Runtime(format!("parse error: {e}")))?;
    if !script.statement.is_empty() {
        println!("statement: {}", script.statement.replace('\n', " "));
    }
    for s in &script.steps {
        println!(
            "[{:>3}] {:<10} {}{}",
            s.index,
            format!("{:?}", s.kind).to_lowercase(),
            s.text.replace('\n', "\\n"),
            if s.marked { "  (marked)" } else { "" }
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(rules: PathBuf, listen: String) -> Result<ExitCode, Failure> {
    let prover = ScriptedProver::load(&rules).map_err(|e| Failure::Config(e.to_string()))?;
    let listener = TcpListener::bind(&listen).map_err(|e| Failure::Runtime(format!("{listen}: {e}")))?;
    log::info!("serving scripted prover on {listen}");
    bridge::serve(listener, Arc::new(prover));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            problems,
            config,
            resume,
            out,
            retry_aborted,
        } => run(problems, config, resume, out, retry_aborted),
        Command::Report { dir } => report(dir),
        Command::CheckProof {
            statement,
            proof,
            tc,
            rules,
            bridge,
        } => check_proof(statement, proof, tc, rules, bridge),
        Command::Parse { file } => parse(file),
        Command::Serve { rules, listen } => serve(rules, listen),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
