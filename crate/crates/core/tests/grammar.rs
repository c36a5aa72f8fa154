//! Conformance of the formula grammar against `fixtures/grammar.txt`.
//!
//! Each line is `input => canonical` or `input => error LINE:COL`; a term
//! line is prefixed with its sort, `v:` or `k:`.

use hcouple::lang::{parse_formula, parse_term, Sort};

const FIXTURE: &str = include_str!("../fixtures/grammar.txt");

fn render(input: &str) -> String {
    let (sort, text) = match input.split_once(':') {
        Some(("v", t)) => (Some(Sort::Vector), t.trim()),
        Some(("k", t)) => (Some(Sort::Scalar), t.trim()),
        _ => (None, input),
    };
    let parsed = match sort {
        Some(s) => parse_term(text, s).map(|t| t.to_string()),
        None => parse_formula(text).map(|f| f.to_string()),
    };
    match parsed {
        Ok(s) => s,
        Err(hcouple::lang::LangError::Syntax { line, col, .. }) => format!("error {line}:{col}"),
        Err(e) => format!("error {e}"),
    }
}

#[test]
fn grammar_fixture() {
    let mut bad = Vec::new();
    let mut n = 0;
    for (i, line) in FIXTURE.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (input, expected) = line.split_once(" => ").unwrap_or_else(|| panic!("line {}: missing ` => `", i + 1));
        let got = render(input.trim());
        n += 1;
        if got != expected.trim() {
            bad.push(format!("line {}: {input} => {got} (fixture says {expected})", i + 1));
        }
        if !got.starts_with("error") {
            assert_eq!(render(&reprint(input, &got)), got, "printing is not a fixed point at line {}", i + 1);
        }
    }
    assert!(n >= 30);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

fn reprint(input: &str, got: &str) -> String {
    match input.split_once(':') {
        Some((s @ ("v" | "k"), _)) => format!("{s}: {got}"),
        _ => got.to_string(),
    }
}
