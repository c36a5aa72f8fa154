//! Acceptance run: each criterion executes its property suite at full size
//! and prints one PASS/FAIL line. Every check inside the suites is exact, so
//! the tolerance is zero violations throughout.
//!
//! Runs without the libtest harness so the lines show up in plain
//! `cargo test` output.

use std::time::{Duration, Instant};

use hcouple::fuzz::{run_suite, Suite, SuiteReport};

const SEED: u64 = 20_240_601;
const MAX_VIOLATIONS: usize = 0;
const AXIOM_BUDGET: Duration = Duration::from_secs(60);
const EXAMPLE_BUDGET: Duration = Duration::from_secs(10);

struct Criterion {
    id: usize,
    title: &'static str,
    suite: Suite,
    budget: Option<Duration>,
    /// `(counter, minimum)`.
    floors: Vec<(&'static str, u64)>,
    /// Counters that must equal each other: every application checked.
    equal: Vec<(&'static str, &'static str)>,
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "axiom suite",
            suite: Suite::Axioms,
            budget: Some(AXIOM_BUDGET),
            floors: vec![("cases", 10_000), ("AC2", 10_000), ("AC3", 10_000), ("HC", 10_000), ("Hahn reduction", 10_000), ("psi difference class", 10_000)],
            equal: vec![],
        },
        Criterion {
            id: 2,
            title: "extension postconditions",
            suite: Suite::Extensions,
            budget: None,
            floors: vec![
                ("applications", 1_000),
                ("re-validation", 1_000),
                ("predicted Psi", 1_000),
                ("embedding soundness", 1_000),
                ("remove gap: embedding soundness", 1),
            ],
            equal: vec![("re-validation", "predicted Psi"), ("re-validation", "embedding soundness")],
        },
        Criterion {
            id: 3,
            title: "closure engine",
            suite: Suite::Closure,
            budget: None,
            floors: vec![("sequences", 1_000), ("answers hold in final stage", 1_000), ("stage embeds in Gamma_L", 1_000)],
            equal: vec![("sequences", "answers hold in final stage"), ("sequences", "final stage validates")],
        },
        Criterion {
            id: 4,
            title: "Gamma_L certificates",
            suite: Suite::LogModel,
            budget: None,
            floors: vec![
                ("alpha + psi(alpha) = gamma", 10_000),
                ("worked integrals", 3),
                ("lambda above sigma_k", 51),
                ("lambda below (Gamma^>)'", 1_000),
                ("density", 1_000),
            ],
            equal: vec![],
        },
        Criterion {
            id: 5,
            title: "transmonomial example",
            suite: Suite::Example,
            budget: Some(EXAMPLE_BUDGET),
            floors: vec![("span rank", 6), ("class inequality", 15), ("psi(v(e^(b e^(cx)))) = v(e^(cx))", 20)],
            equal: vec![],
        },
        Criterion {
            id: 6,
            title: "classifier",
            suite: Suite::Classifier,
            budget: None,
            floors: vec![
                ("fixture verdict", 1),
                ("last dagger is 0", 1),
                ("case invariants", 1),
                ("gap verdict", 1),
                ("gap adds no psi-values", 1),
                ("key interval", 100),
            ],
            equal: vec![],
        },
        Criterion {
            id: 7,
            title: "monotone solver",
            suite: Suite::Monotone,
            budget: None,
            floors: vec![("same-component pairs", 10_000), ("round trips", 1_000)],
            equal: vec![],
        },
        Criterion {
            id: 8,
            title: "language layer",
            suite: Suite::Language,
            budget: None,
            floors: vec![("infinity defaults", 1), ("corpus", 1), ("corpus formulas", 50), ("corpus existentials", 6), ("verified witnesses", 1)],
            equal: vec![],
        },
        Criterion {
            id: 9,
            title: "scalar extension",
            suite: Suite::ScalarExtension,
            budget: None,
            floors: vec![("Psi preserved", 1_000), ("trichotomy preserved", 1_000), ("separation", 1_000)],
            equal: vec![],
        },
    ]
}

fn judge(c: &Criterion, r: &SuiteReport, elapsed: Duration) -> Vec<String> {
    let mut why = Vec::new();
    if r.violation_count > MAX_VIOLATIONS {
        why.push(format!("{} violations, first: {}", r.violation_count, r.violations.first().map_or("", |v| v.as_str())));
    }
    for (key, min) in &c.floors {
        if r.count(key) < *min {
            why.push(format!("{key}: {} < {min}", r.count(key)));
        }
    }
    for (a, b) in &c.equal {
        if r.count(a) != r.count(b) {
            why.push(format!("{a} ({}) != {b} ({})", r.count(a), r.count(b)));
        }
    }
    if let Some(limit) = c.budget {
        if elapsed > limit {
            why.push(format!("took {elapsed:.1?}, budget {limit:?}"));
        }
    }
    why
}

fn main() {
    let mut failed = Vec::new();
    for c in criteria() {
        let start = Instant::now();
        let r = run_suite(c.suite, SEED, c.suite.default_cases(), 0);
        let elapsed = start.elapsed();
        let why = judge(&c, &r, elapsed);
        let counts: Vec<String> = c.floors.iter().map(|(k, _)| format!("{k}={}", r.count(k))).collect();
        if why.is_empty() {
            println!("PASS [{}] {}: {} cases, {} violations, {:.1?} ({})", c.id, c.title, r.cases, r.violation_count, elapsed, counts.join(", "));
        } else {
            println!("FAIL [{}] {}: {}", c.id, c.title, why.join("; "));
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
