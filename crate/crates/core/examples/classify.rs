//! Classify the extension of the span of 1 by v(e^(e^x)).

use hcouple::analysis::{case_invariants, classify, key_interval_radius, Span, DEFAULT_MAX_STEPS};
use hcouple::tmodel::{Monomial, TransModel};

fn main() {
    let t = TransModel;
    let one: Monomial = "x^(-1)".parse().expect("monomial");
    let base = Span::psi_closed(&t, &[one], 8).expect("{1} is psi-closed");
    let beta: Monomial = "exp(exp(x))".parse().expect("monomial");
    let r = classify(&t, &base, &beta, DEFAULT_MAX_STEPS).expect("classifies");
    println!("verdict {}", r.verdict);
    println!("{}", serde_json::to_string_pretty(&r.to_json()).expect("json"));
    let checks = case_invariants(&t, &base, &r).expect("checkable");
    println!("invariants pass: {}", checks.passed());
    println!("key interval radius: {}", key_interval_radius(&t, &r).expect("radius"));
}
