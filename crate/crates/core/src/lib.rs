pub mod conjecture;
pub mod fixtures;
pub mod harness;
pub mod isar;
pub mod llm;
pub mod prover;
pub mod tool_correction;
