//! Segmentation of Isar proof text into prover-checkable steps.
//!
//! The segmenter is deliberately shallow: it knows how to skip comments,
//! string literals, cartouches and bracketed groups, and it starts a new step
//! at every top-level Isar command keyword. A line such as
//! `have "x = 1" using h by simp` therefore becomes three steps
//! (`have "x = 1"`, `using h`, `by simp`), which lets tool correction swap the
//! terminal method without touching the goal statement.
//!
//! Reassembly is always byte-exact: steps carry their source span and every
//! byte between spans (whitespace, comments, substitution markers) is taken
//! from the original text.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Annotation appended to steps replaced by tool correction.
pub const MARKER: &str = "[ATPWithTC]";

/// Commands that start a new step inside a proof body.
const STEP_KEYWORDS: &[&str] = &[
    "proof",
    "qed",
    "by",
    "apply",
    "apply_end",
    "done",
    "sorry",
    "oops",
    "sledgehammer",
    ".",
    "..",
    "have",
    "show",
    "hence",
    "thus",
    "obtain",
    "fix",
    "assume",
    "presume",
    "let",
    "def",
    "define",
    "note",
    "from",
    "with",
    "using",
    "unfolding",
    "then",
    "moreover",
    "ultimately",
    "also",
    "finally",
    "case",
    "next",
    "{",
    "}",
    "consider",
    "interpret",
    "include",
    "including",
    "supply",
    "subgoal",
    "defer",
    "prefer",
    "end",
    "theorem",
    "lemma",
    "corollary",
    "proposition",
];

/// Commands that may open a proof directly after a theorem header.
pub const PROOF_OPENERS: &[&str] = &[
    "proof",
    "by",
    "apply",
    "using",
    "unfolding",
    "including",
    "supply",
    "sledgehammer",
    "sorry",
    "oops",
    ".",
    "..",
];

pub const HEADER_KEYWORDS: &[&str] = &[
    "theorem",
    "lemma",
    "corollary",
    "proposition",
    "schematic_goal",
];

const CHEATING_KEYWORDS: &[&str] = &["sorry", "oops"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty proof text")]
    Empty,
    #[error("unbalanced comment delimiter at byte {offset}")]
    UnbalancedComment { offset: usize },
    #[error("no proof body after the statement")]
    NoProofBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("substitution targets step {index}, but the script has {len} steps")]
    NoSuchStep { index: usize, len: usize },
    #[error("substitution targets structural step {index}")]
    StructuralStep { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Ends a goal: `by ...`, `.`, `..`, or anything invoking sledgehammer.
    Terminal,
    Structural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticStep {
    pub index: usize,
    /// Verbatim step text, starting at its command keyword.
    pub text: String,
    pub kind: StepKind,
    /// Byte offsets of `text` inside the original proof text.
    pub source_span: Range<usize>,
    /// Comments that precede this step.
    pub comments: Vec<String>,
    /// Whether the step was already followed by a substitution marker.
    pub marked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofScript {
    pub steps: Vec<TacticStep>,
    pub raw_text: String,
    /// Theorem header, from the `theorem`/`lemma` keyword through the last
    /// token before the proof body. Empty when the text has no header.
    pub statement: String,
}

impl ProofScript {
    pub fn terminal_steps(&self) -> impl Iterator<Item = &TacticStep> {
        self.steps.iter().filter(|s| s.kind == StepKind::Terminal)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub has_cheating: bool,
    /// `(keyword, byte offset)` for each occurrence.
    pub offending_keywords: Vec<(String, usize)>,
}

/// Classifies trimmed step text.
pub fn classify(text: &str) -> StepKind {
    let t = text.trim();
    let by_step = t == "by"
        || t
            .strip_prefix("by")
            .and_then(|rest| rest.chars().next())
            .is_some_and(|c| c.is_whitespace() || c == '(');
    if by_step || t == "." || t == ".." || contains_word(t, "sledgehammer") {
        StepKind::Terminal
    } else {
        StepKind::Structural
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '?'
}

/// Whole-word containment.
pub(crate) fn contains_word(haystack: &str, word: &str) -> bool {
    haystack.match_indices(word).any(|(i, _)| {
        let before = haystack[..i].chars().next_back();
        let after = haystack[i + word.len()..].chars().next();
        !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Word,
    Group,
    Comment,
    Marker,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    span: Range<usize>,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.peek().is_some_and(char::is_whitespace) {
                self.bump();
            }
            let start = self.pos;
            let Some(c) = self.peek() else { break };
            let kind = if self.rest().starts_with("(*") {
                self.skip_comment()?;
                TokKind::Comment
            } else if self.rest().starts_with("*)") {
                return Err(ParseError::UnbalancedComment { offset: start });
            } else if c == '[' {
                self.skip_group()?;
                let inner = self.src[start..self.pos]
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'));
                if inner.is_some_and(|s| s.trim() == "ATPWithTC") {
                    TokKind::Marker
                } else {
                    TokKind::Group
                }
            } else if matches!(c, '(' | '"' | '`' | '‹') || self.rest().starts_with("\\<open>") {
                self.skip_group()?;
                TokKind::Group
            } else if c == '{' || c == '}' {
                self.bump();
                TokKind::Word
            } else {
                self.skip_word();
                TokKind::Word
            };
            out.push(Token {
                kind,
                span: start..self.pos,
            });
        }
        Ok(out)
    }

    fn skip_word(&mut self) {
        // Always consume at least one char so stray closers cannot stall.
        self.bump();
        while let Some(c) = self.peek() {
            if c.is_whitespace()
                || matches!(c, '(' | '[' | '"' | '`' | '‹' | '{' | '}')
                || self.rest().starts_with("\\<open>")
                || self.rest().starts_with("*)")
            {
                break;
            }
            self.bump();
        }
    }

    /// Skips a nested `(* ... *)` comment starting at the current position.
    fn skip_comment(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let mut depth = 0usize;
        while !self.rest().is_empty() {
            if self.rest().starts_with("(*") {
                depth += 1;
                self.pos += 2;
            } else if self.rest().starts_with("*)") {
                depth -= 1;
                self.pos += 2;
                if depth == 0 {
                    return Ok(());
                }
            } else {
                self.bump();
            }
        }
        Err(ParseError::UnbalancedComment { offset: start })
    }

    fn skip_quoted(&mut self, close: char) {
        self.bump();
        while let Some(c) = self.bump() {
            if c == '\\' && close == '"' && self.peek() == Some('"') {
                self.bump();
            } else if c == close {
                return;
            }
        }
    }

    fn skip_cartouche(&mut self) {
        let mut depth = 0usize;
        while !self.rest().is_empty() {
            if self.rest().starts_with('‹') {
                depth += 1;
                self.bump();
            } else if self.rest().starts_with("\\<open>") {
                depth += 1;
                self.pos += "\\<open>".len();
            } else if self.rest().starts_with('›') {
                depth -= 1;
                self.bump();
            } else if self.rest().starts_with("\\<close>") {
                depth -= 1;
                self.pos += "\\<close>".len();
            } else {
                self.bump();
            }
            if depth == 0 {
                return;
            }
        }
    }

    /// Skips a bracketed group, string, backquoted fact, or cartouche.
    /// Unterminated groups run to the end of the text.
    fn skip_group(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some('"') => {
                self.skip_quoted('"');
                return Ok(());
            }
            Some('`') => {
                self.skip_quoted('`');
                return Ok(());
            }
            Some('‹') => {
                self.skip_cartouche();
                return Ok(());
            }
            _ if self.rest().starts_with("\\<open>") => {
                self.skip_cartouche();
                return Ok(());
            }
            _ => {}
        }
        let mut stack = vec![self.bump().expect("group opener")];
        while let Some(c) = self.peek() {
            if self.rest().starts_with("(*") {
                self.skip_comment()?;
                continue;
            }
            match c {
                '"' | '`' | '‹' => self.skip_group()?,
                _ if self.rest().starts_with("\\<open>") => self.skip_group()?,
                '(' | '[' => {
                    stack.push(c);
                    self.bump();
                }
                ')' | ']' => {
                    self.bump();
                    stack.pop();
                    if stack.is_empty() {
                        return Ok(());
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
        Ok(())
    }
}

/// Splits proof text into steps.
pub fn parse_proof(text: &str) -> Result<ProofScript, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = Lexer::new(text).tokens()?;
    let word = |t: &Token| (t.kind == TokKind::Word).then(|| &text[t.span.clone()]);

    let header = tokens
        .iter()
        .position(|t| word(t).is_some_and(|w| HEADER_KEYWORDS.contains(&w)));
    let body_start = match header {
        Some(h) => tokens
            .iter()
            .enumerate()
            .skip(h + 1)
            .find(|(_, t)| word(t).is_some_and(|w| PROOF_OPENERS.contains(&w)))
            .map(|(i, _)| i),
        None => tokens
            .iter()
            .position(|t| word(t).is_some_and(|w| STEP_KEYWORDS.contains(&w))),
    }
    .ok_or(ParseError::NoProofBody)?;

    let statement = match header {
        Some(h) => {
            let end = tokens[h..body_start]
                .iter()
                .rev()
                .find(|t| t.kind != TokKind::Comment)
                .map_or(tokens[h].span.end, |t| t.span.end);
            text[tokens[h].span.start..end].to_string()
        }
        None => String::new(),
    };

    // Comments between the header and the body attach to the first step.
    let mut pending: Vec<String> = tokens[header.unwrap_or(0)..body_start]
        .iter()
        .filter(|t| t.kind == TokKind::Comment)
        .map(|t| text[t.span.clone()].to_string())
        .collect();

    struct Open {
        span: Range<usize>,
        comments: Vec<String>,
        marked: bool,
    }
    let mut spans: Vec<Open> = Vec::new();
    for tok in &tokens[body_start..] {
        match tok.kind {
            TokKind::Comment => pending.push(text[tok.span.clone()].to_string()),
            TokKind::Marker => {
                if let Some(cur) = spans.last_mut() {
                    cur.marked = true;
                }
            }
            TokKind::Word if STEP_KEYWORDS.contains(&&text[tok.span.clone()]) => {
                spans.push(Open {
                    span: tok.span.clone(),
                    comments: std::mem::take(&mut pending),
                    marked: false,
                });
            }
            TokKind::Word | TokKind::Group => {
                let cur = spans.last_mut().expect("body starts with a keyword");
                cur.span.end = tok.span.end;
                // Comments enclosed by the step's own tokens stay in its text.
                pending.clear();
                if cur.marked {
                    cur.marked = false;
                }
            }
        }
    }

    let steps = spans
        .into_iter()
        .enumerate()
        .map(|(index, open)| {
            let step_text = text[open.span.clone()].to_string();
            TacticStep {
                index,
                kind: classify(&step_text),
                text: step_text,
                source_span: open.span,
                comments: open.comments,
                marked: open.marked,
            }
        })
        .collect();

    Ok(ProofScript {
        steps,
        raw_text: text.to_string(),
        statement,
    })
}

/// Flags `sorry` and `oops` outside comments and literals.
pub fn check_validity(text: &str) -> ValidityReport {
    let mut offending = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with("(*") {
            let mut depth = 0usize;
            while i < text.len() {
                if text[i..].starts_with("(*") {
                    depth += 1;
                    i += 2;
                } else if text[i..].starts_with("*)") {
                    depth -= 1;
                    i += 2;
                    if depth == 0 {
                        break;
                    }
                } else {
                    i += text[i..].chars().next().map_or(1, char::len_utf8);
                }
            }
            continue;
        }
        let c = rest.chars().next().expect("non-empty");
        if c == '"' || c == '`' {
            i += 1;
            while i < text.len() {
                let d = text[i..].chars().next().expect("non-empty");
                i += d.len_utf8();
                if d == '\\' && c == '"' && bytes.get(i) == Some(&b'"') {
                    i += 1;
                } else if d == c {
                    break;
                }
            }
            continue;
        }
        if c == '‹' || rest.starts_with("\\<open>") {
            let mut depth = 0usize;
            while i < text.len() {
                let r = &text[i..];
                if r.starts_with('‹') {
                    depth += 1;
                    i += '‹'.len_utf8();
                } else if r.starts_with("\\<open>") {
                    depth += 1;
                    i += "\\<open>".len();
                } else if r.starts_with('›') {
                    depth -= 1;
                    i += '›'.len_utf8();
                } else if r.starts_with("\\<close>") {
                    depth -= 1;
                    i += "\\<close>".len();
                } else {
                    i += r.chars().next().map_or(1, char::len_utf8);
                }
                if depth == 0 {
                    break;
                }
            }
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < text.len() {
                let d = text[i..].chars().next().expect("non-empty");
                if !is_word_char(d) {
                    break;
                }
                i += d.len_utf8();
            }
            let w = &text[start..i];
            if CHEATING_KEYWORDS.contains(&w) {
                offending.push((w.to_string(), start));
            }
            continue;
        }
        i += c.len_utf8();
    }
    ValidityReport {
        has_cheating: !offending.is_empty(),
        offending_keywords: offending,
    }
}

/// Reassembles the proof, replacing substituted terminal steps and tagging
/// each replacement with [`MARKER`].
pub fn render_with_markers(
    script: &ProofScript,
    substitutions: &BTreeMap<usize, String>,
) -> Result<String, RenderError> {
    for &index in substitutions.keys() {
        let step = script.steps.get(index).ok_or(RenderError::NoSuchStep {
            index,
            len: script.steps.len(),
        })?;
        if step.kind != StepKind::Terminal {
            return Err(RenderError::StructuralStep { index });
        }
    }
    let raw = &script.raw_text;
    let mut out = String::with_capacity(raw.len() + substitutions.len() * 16);
    let mut cursor = 0;
    for (&index, replacement) in substitutions {
        let step = &script.steps[index];
        out.push_str(&raw[cursor..step.source_span.start]);
        out.push_str(replacement);
        if !step.marked {
            out.push(' ');
            out.push_str(MARKER);
        }
        cursor = step.source_span.end;
    }
    out.push_str(&raw[cursor..]);
    Ok(out)
}

/// Removes substitution markers, including the malformed `ATPWithTC]` form,
/// together with the whitespace that precedes them.
pub fn strip_markers(text: &str) -> String {
    let re = regex::Regex::new(r"[ \t]*\[?ATPWithTC\]").expect("valid regex");
    re.replace_all(text, "").into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(script: &ProofScript) -> Vec<&str> {
        script.steps.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn splits_terminal_suffix() {
        let s = parse_proof("proof -\n  show ?thesis by simp\nqed").unwrap();
        assert_eq!(texts(&s), ["proof -", "show ?thesis", "by simp", "qed"]);
        let kinds: Vec<_> = s.steps.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            [
                StepKind::Structural,
                StepKind::Structural,
                StepKind::Terminal,
                StepKind::Structural
            ]
        );
        assert!(s.statement.is_empty());
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(parse_proof(""), Err(ParseError::Empty));
        assert_eq!(parse_proof(" \n "), Err(ParseError::Empty));
    }

    #[test]
    fn unbalanced_comments_are_rejected() {
        assert!(matches!(
            parse_proof("proof -\n (* open\nqed"),
            Err(ParseError::UnbalancedComment { offset: 9 })
        ));
        assert!(matches!(
            parse_proof("proof - *) qed"),
            Err(ParseError::UnbalancedComment { .. })
        ));
    }

    #[test]
    fn header_without_body_is_rejected() {
        assert_eq!(
            parse_proof("theorem t:\n  shows \"x = x\""),
            Err(ParseError::NoProofBody)
        );
    }

    #[test]
    fn statement_excludes_trailing_comment() {
        let text = "(*statement begin*)\ntheorem t:\n  fixes x :: nat\n  shows \"x = x\"\n(*statement end*)\nproof -\n  show ?thesis by simp\nqed";
        let s = parse_proof(text).unwrap();
        assert_eq!(s.statement, "theorem t:\n  fixes x :: nat\n  shows \"x = x\"");
        assert_eq!(s.steps[0].text, "proof -");
        assert_eq!(s.steps[0].comments, ["(*statement end*)"]);
    }

    #[test]
    fn one_line_proof_after_header() {
        let s = parse_proof("lemma l: \"1 + 1 = (2::nat)\" by simp").unwrap();
        assert_eq!(s.statement, "lemma l: \"1 + 1 = (2::nat)\"");
        assert_eq!(texts(&s), ["by simp"]);
        assert_eq!(s.steps[0].kind, StepKind::Terminal);
    }

    #[test]
    fn comments_attach_forward() {
        let s = parse_proof("proof -\n  (* first *)\n  (* second *)\n  have \"a\" by auto\nqed").unwrap();
        assert_eq!(s.steps[1].text, "have \"a\"");
        assert_eq!(s.steps[1].comments, ["(* first *)", "(* second *)"]);
        assert!(s.steps.iter().all(|st| !st.text.contains("(*")));
    }

    #[test]
    fn multi_line_method_is_one_step() {
        let text = "proof -\n  have \"x\"\n    by (smt add.commute add_lessD1\n    semiring_norm(76))\nqed";
        let s = parse_proof(text).unwrap();
        assert_eq!(
            s.steps[2].text,
            "by (smt add.commute add_lessD1\n    semiring_norm(76))"
        );
        assert_eq!(s.steps[2].kind, StepKind::Terminal);
    }

    #[test]
    fn keywords_inside_literals_do_not_split() {
        let s = parse_proof("proof -\n  have \"P then Q\" using `x by y` by (simp add: show_def)\nqed").unwrap();
        assert_eq!(
            texts(&s),
            [
                "proof -",
                "have \"P then Q\"",
                "using `x by y`",
                "by (simp add: show_def)",
                "qed"
            ]
        );
    }

    #[test]
    fn markers_are_excluded_from_step_text() {
        let s = parse_proof("proof -\n  show ?thesis by auto [ATPWithTC]\nqed").unwrap();
        assert_eq!(s.steps[2].text, "by auto");
        assert!(s.steps[2].marked);
        assert!(!s.steps[1].marked);
    }

    #[test]
    fn dot_steps_are_terminal() {
        let s = parse_proof("proof -\n  finally show ?thesis .\nnext show ?x ..\nqed").unwrap();
        assert_eq!(s.steps[3].text, ".");
        assert_eq!(s.steps[3].kind, StepKind::Terminal);
        assert_eq!(s.steps[6].text, "..");
        assert_eq!(s.steps[6].kind, StepKind::Terminal);
    }

    #[test]
    fn question_case_is_not_a_keyword() {
        let s = parse_proof("proof (induction n)\n  case 0\n  then show ?case by simp\nqed").unwrap();
        assert_eq!(
            texts(&s),
            ["proof (induction n)", "case 0", "then", "show ?case", "by simp", "qed"]
        );
    }

    #[test]
    fn classification() {
        assert_eq!(classify("by simp"), StepKind::Terminal);
        assert_eq!(classify("  by  "), StepKind::Terminal);
        assert_eq!(classify("by(simp)"), StepKind::Terminal);
        assert_eq!(classify("by\n  (metis foo)"), StepKind::Terminal);
        assert_eq!(classify("bystander"), StepKind::Structural);
        assert_eq!(classify("."), StepKind::Terminal);
        assert_eq!(classify(".."), StepKind::Terminal);
        assert_eq!(classify("..."), StepKind::Structural);
        assert_eq!(classify("sledgehammer"), StepKind::Terminal);
        assert_eq!(classify("using h sledgehammer"), StepKind::Terminal);
        assert_eq!(classify("have sledgehammer_params"), StepKind::Structural);
        assert_eq!(classify("show ?thesis"), StepKind::Structural);
    }

    #[test]
    fn validity_examples() {
        let r = check_validity("show ?thesis sorry");
        assert!(r.has_cheating);
        assert_eq!(r.offending_keywords, [("sorry".to_string(), 13)]);
        assert!(!check_validity("(* sorry *) by auto").has_cheating);
        assert!(!check_validity("by auto").has_cheating);
        assert!(!check_validity("have \"sorry\" by auto").has_cheating);
        assert!(!check_validity("using sorry_lemma by auto").has_cheating);
        assert!(!check_validity("(* (* nested *) oops *) by simp").has_cheating);
        let r = check_validity("have x oops\n sorry");
        assert_eq!(
            r.offending_keywords,
            [("oops".to_string(), 7), ("sorry".to_string(), 13)]
        );
    }

    #[test]
    fn render_replaces_terminal_step() {
        let text = "proof -\n  have \"x = 19 * (x div 19) + 4\"\n    by (simp add: div_mult_mod_eq)\nqed";
        let s = parse_proof(text).unwrap();
        assert_eq!(s.steps[2].text, "by (simp add: div_mult_mod_eq)");
        let subs = BTreeMap::from([(2, "by arith".to_string())]);
        let out = render_with_markers(&s, &subs).unwrap();
        assert_eq!(
            out,
            "proof -\n  have \"x = 19 * (x div 19) + 4\"\n    by arith [ATPWithTC]\nqed"
        );
        assert_eq!(render_with_markers(&s, &BTreeMap::new()).unwrap(), text);
    }

    #[test]
    fn render_rejects_bad_targets() {
        let s = parse_proof("proof -\n  show ?thesis by simp\nqed").unwrap();
        let structural = BTreeMap::from([(1, "by auto".to_string())]);
        assert_eq!(
            render_with_markers(&s, &structural),
            Err(RenderError::StructuralStep { index: 1 })
        );
        let missing = BTreeMap::from([(9, "by auto".to_string())]);
        assert_eq!(
            render_with_markers(&s, &missing),
            Err(RenderError::NoSuchStep { index: 9, len: 4 })
        );
    }

    #[test]
    fn render_does_not_double_mark() {
        let text = "proof -\n  show ?thesis by auto [ATPWithTC]\nqed";
        let s = parse_proof(text).unwrap();
        let subs = BTreeMap::from([(2, "by simp".to_string())]);
        assert_eq!(
            render_with_markers(&s, &subs).unwrap(),
            "proof -\n  show ?thesis by simp [ATPWithTC]\nqed"
        );
    }

    #[test]
    fn strip_markers_handles_both_forms() {
        assert_eq!(
            strip_markers("by simp [ATPWithTC]\n  by auto ATPWithTC]\n"),
            "by simp\n  by auto\n"
        );
    }
}
