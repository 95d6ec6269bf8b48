use std::collections::BTreeMap;

use proptest::prelude::*;
use regex::Regex;

use proof_refine::fixtures::{load_fixture, FIXTURE_NAMES};
use proof_refine::isar::{check_validity, classify, parse_proof, render_with_markers, StepKind};

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec![
            "have", "show", "then", "using", "by", "proof", "qed", "next", "also", "finally", "obtain", "fix",
            "assume", "case", "from", "with", "hence", "thus", "note", "sledgehammer", "simp", "auto", "-", ".",
            "..", "?thesis", "assms", "(simp add: x)", "[ATPWithTC]", "ATPWithTC]", "sorry", "oops",
        ])
        .prop_map(str::to_string),
        "\"[a-z <\\\\>]{0,8}\"",
        "\\(\\* [a-z by\"]{0,8} \\*\\)",
        "`[a-z ]{0,5}`",
        "[a-z_]{1,6}",
    ]
}

fn separator() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![" ", "  ", "\n", "\n  ", "\t", "\r\n"])
}

fn isar_text() -> impl Strategy<Value = String> {
    prop::collection::vec((token(), separator()), 1..30).prop_map(|parts| {
        let mut s = String::new();
        for (t, sep) in parts {
            s.push_str(&t);
            s.push_str(sep);
        }
        s
    })
}

fn reference_kind(text: &str) -> StepKind {
    let by = Regex::new(r"^by(\s|\(|$)").unwrap();
    let sledge = Regex::new(r"(^|[^A-Za-z0-9_'?])sledgehammer([^A-Za-z0-9_'?]|$)").unwrap();
    let t = text.trim();
    if by.is_match(t) || t == "." || t == ".." || sledge.is_match(t) {
        StepKind::Terminal
    } else {
        StepKind::Structural
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parse_render_round_trip(text in isar_text()) {
        if let Ok(script) = parse_proof(&text) {
            prop_assert_eq!(render_with_markers(&script, &BTreeMap::new()).unwrap(), text);
        }
    }

    #[test]
    fn steps_are_contiguous_and_cover_their_spans(text in isar_text()) {
        if let Ok(script) = parse_proof(&text) {
            let mut end = 0;
            for (i, step) in script.steps.iter().enumerate() {
                prop_assert_eq!(step.index, i);
                prop_assert!(step.source_span.start >= end);
                prop_assert_eq!(&text[step.source_span.clone()], step.text.as_str());
                prop_assert_eq!(step.kind, classify(&step.text));
                end = step.source_span.end;
            }
        }
    }

    #[test]
    fn classification_depends_only_on_trimmed_text(
        line in prop_oneof![isar_text(), "(by|\\.|\\.\\.|sledgehammer)[ (a-z]{0,6}"],
        pad in "[ \t\n]{0,3}",
    ) {
        let padded = format!("{pad}{line}{pad}");
        prop_assert_eq!(classify(&padded), classify(line.trim()));
        prop_assert_eq!(classify(&line), reference_kind(&line));
    }

    #[test]
    fn keywords_in_comments_are_ignored(
        words in prop::collection::vec(prop::sample::select(vec!["have", "show", "by simp", "sorryish", "oopsie", "qed"]), 0..6),
        hidden in prop::collection::vec(prop::sample::select(vec!["sorry", "oops", "(* sorry *)", "by sorry", "oops."]), 1..4),
    ) {
        let mut text = words.join(" ");
        for h in hidden {
            text.push_str(&format!(" (* {h} *) "));
        }
        text.push_str(" \"sorry\" `oops`");
        let report = check_validity(&text);
        prop_assert!(!report.has_cheating, "{:?} in {:?}", report, text);
    }

    #[test]
    fn reported_offsets_point_at_keywords(text in isar_text()) {
        let report = check_validity(&text);
        prop_assert_eq!(report.has_cheating, !report.offending_keywords.is_empty());
        for (kw, at) in &report.offending_keywords {
            prop_assert!(text[*at..].starts_with(kw.as_str()));
        }
    }
}

#[test]
fn fixture_proofs_are_free_of_cheating() {
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).unwrap();
        for (label, text) in f.responses().unwrap() {
            assert!(!check_validity(&text).has_cheating, "{name} {label}");
        }
    }
}

#[test]
fn third_inequality_round_carries_nine_markers() {
    let f = load_fixture("imo_1974_p5").unwrap();
    let figure = f.figure("figures/round3.thy").unwrap();
    let script = parse_proof(&figure).unwrap();
    assert_eq!(script.steps.iter().filter(|s| s.marked).count(), 9);
}

#[test]
fn statements_are_recovered_from_figures() {
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).unwrap();
        for (label, text) in f.responses().unwrap() {
            if let Ok(script) = parse_proof(&text) {
                if text.trim_start().starts_with("theorem") {
                    // One figure repeats the header; the last copy is the statement.
                    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
                    assert!(
                        norm(&script.statement).ends_with(&norm(&f.problem.formal_statement)),
                        "{name} {label}"
                    );
                }
            }
        }
    }
}
