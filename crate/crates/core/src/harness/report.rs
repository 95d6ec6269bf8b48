use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Problem, ProblemRun, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub id: String,
    pub split: Split,
    pub solved: bool,
    pub first_solved_attempt: Option<usize>,
    pub attempts_run: usize,
    pub aborted: Option<String>,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub problems: usize,
    pub solved: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub solved: usize,
}

/// Suite-level aggregate. Contains no timings, so scripted runs reproduce it
/// byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub attempts: usize,
    pub complete: bool,
    pub problems: Vec<ProblemSummary>,
    pub splits: BTreeMap<Split, SplitSummary>,
    pub curve: Vec<CurvePoint>,
}

impl SuiteReport {
    /// `runs[i]` belongs to `problems[i]`; `None` means never started.
    pub fn build(attempts: usize, problems: &[Problem], runs: &[Option<ProblemRun>]) -> Self {
        let summaries: Vec<ProblemSummary> = problems
            .iter()
            .zip(runs)
            .map(|(p, run)| {
                let first = run.as_ref().and_then(ProblemRun::first_solved);
                let attempts_run = run.as_ref().map_or(0, |r| r.records.len());
                let aborted = run.as_ref().and_then(|r| r.aborted.clone());
                ProblemSummary {
                    id: p.id.clone(),
                    split: p.split,
                    solved: first.is_some(),
                    first_solved_attempt: first,
                    attempts_run,
                    finished: first.is_some() || aborted.is_some() || attempts_run >= attempts,
                    aborted,
                }
            })
            .collect();

        let mut splits: BTreeMap<Split, SplitSummary> = BTreeMap::new();
        for s in &summaries {
            let e = splits.entry(s.split).or_insert(SplitSummary {
                problems: 0,
                solved: 0,
                success_rate: 0.0,
            });
            e.problems += 1;
            e.solved += usize::from(s.solved);
        }
        for e in splits.values_mut() {
            e.success_rate = e.solved as f64 / e.problems as f64;
        }

        let curve = (1..=attempts)
            .map(|n| CurvePoint {
                n,
                solved: summaries
                    .iter()
                    .filter(|s| s.first_solved_attempt.is_some_and(|a| a < n))
                    .count(),
            })
            .collect();

        Self {
            attempts,
            complete: summaries.iter().all(|s| s.finished),
            problems: summaries,
            splits,
            curve,
        }
    }

    pub fn solved(&self) -> usize {
        self.problems.iter().filter(|p| p.solved).count()
    }

    pub fn any_aborted(&self) -> bool {
        self.problems.iter().any(|p| p.aborted.is_some())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn curve_csv(&self) -> String {
        let mut out = String::from("n,solved\n");
        for p in &self.curve {
            out.push_str(&format!("{},{}\n", p.n, p.solved));
        }
        out
    }
}
