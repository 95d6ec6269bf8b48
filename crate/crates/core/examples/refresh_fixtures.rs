//! Regenerates `fixtures/*/transcript.jsonl` from each fixture's canned
//! responses. Run after editing a figure, rules.json or expected.json.

use std::process::ExitCode;

use proof_refine::fixtures::{fixtures_root, record_transcript, FIXTURE_NAMES, TRANSCRIPT_FILE};
use proof_refine::llm::write_transcript;

fn main() -> ExitCode {
    let root = fixtures_root();
    let mut status = ExitCode::SUCCESS;
    for name in FIXTURE_NAMES {
        match record_transcript(&root, name) {
            Ok(entries) => {
                let path = root.join(name).join(TRANSCRIPT_FILE);
                if let Err(e) = write_transcript(&path, &entries) {
                    eprintln!("{}: {e}", path.display());
                    status = ExitCode::FAILURE;
                } else {
                    println!("{name}: {} requests", entries.len());
                }
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                status = ExitCode::FAILURE;
            }
        }
    }
    status
}
