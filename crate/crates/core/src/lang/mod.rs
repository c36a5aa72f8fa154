//! The two-sorted first-order language of normalized H-triples: vector terms
//! in `Gamma_inf`, scalar terms in `k_inf`, the cut predicate `P`, and the
//! colon function `:` linking the sorts.
//!
//! Concrete syntax (ASCII):
//!
//! ```text
//! formula := quant | disj
//! quant   := ("exists" | "forall") name [":" ("v" | "k")] "." formula
//! disj    := conj ("or" conj)*
//! conj    := unary ("and" unary)*
//! unary   := "not" unary | quant | "(" formula ")" | "true" | "false" | atom
//! atom    := "P" "(" term ")" | term rel term
//! rel     := "=" | "<" | "<=" | ">" | ">=" | "!="
//! term    := product (("+" | "-") product)*
//! product := colon ("*" colon)*
//! colon   := prefix [":" prefix]
//! prefix  := "-" prefix | primary
//! primary := numeral | "[" model-element "]" | "{" scalar "}" | "inf" | name
//!          | "psi" "(" term ")" | "sc" "(" term "," term ")" | "(" term ")"
//! ```
//!
//! `0`, `1` and `inf` belong to both sorts, other numerals are scalars, and
//! `c * t` with `t` a vector means `sc(c, t)`. A variable whose sort is not
//! forced by its uses is a scalar when its name starts with `c`, `d` or `k`
//! and a vector otherwise.

mod ast;
mod eval;
mod parse;

use thiserror::Error;

pub use ast::{Ast, Binder, Formula, STerm, Sort, VTerm};
pub use eval::{
    bounded_exists, bounded_exists_closure, decide_qf, eval_bounded, eval_qf, eval_sterm, eval_vterm,
    scalar_formula_terms, witness_grid, Assignment, ExistsOutcome, Truth, VVal, WitnessGrid,
};
pub use parse::{default_sort, parse, parse_formula, parse_term};

use crate::model::Couple;
use crate::scalar::{ExtScalar, ScalarValue};
use crate::tmodel::{LogElement, LogModel, ShiftedLogModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },
    #[error("sort error in {term}: expected {expected}, found {found}")]
    Sort { term: String, expected: Sort, found: Sort },
    #[error("unknown constant [{0}]")]
    UnknownConstant(String),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("the model has no fixed point 1")]
    NoUnit,
    #[error("formula has quantifiers")]
    NotQuantifierFree,
    #[error("free variables: {0:?}")]
    NotClosed(Vec<String>),
    #[error("expected `exists y. phi` with a vector variable and quantifier-free phi")]
    NotExistential,
}

/// One of the default equations that make every primitive total. Each
/// instance must evaluate to `inf` for every vector `y` and scalar `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefaultLaw {
    pub name: &'static str,
    pub sort: Sort,
    pub instances: &'static [&'static str],
}

pub const INFINITY_DEFAULTS: [DefaultLaw; 14] = [
    DefaultLaw { name: "-inf = inf", sort: Sort::Vector, instances: &["-inf"] },
    DefaultLaw { name: "y + inf = inf", sort: Sort::Vector, instances: &["y + inf"] },
    DefaultLaw { name: "inf + y = inf", sort: Sort::Vector, instances: &["inf + y"] },
    DefaultLaw { name: "inf + inf = inf", sort: Sort::Vector, instances: &["inf + inf"] },
    DefaultLaw { name: "psi(0) = inf", sort: Sort::Vector, instances: &["psi(0)", "psi(y + -y)"] },
    DefaultLaw { name: "psi(inf) = inf", sort: Sort::Vector, instances: &["psi(inf)"] },
    DefaultLaw { name: "-inf = inf (scalars)", sort: Sort::Scalar, instances: &["-inf"] },
    DefaultLaw { name: "c + inf = inf", sort: Sort::Scalar, instances: &["c + inf"] },
    DefaultLaw { name: "inf + c = inf", sort: Sort::Scalar, instances: &["inf + c"] },
    DefaultLaw { name: "inf + inf = inf (scalars)", sort: Sort::Scalar, instances: &["inf + inf"] },
    DefaultLaw { name: "c inf = inf", sort: Sort::Scalar, instances: &["c * inf"] },
    DefaultLaw { name: "inf c = inf", sort: Sort::Scalar, instances: &["inf * c"] },
    DefaultLaw { name: "inf inf = inf", sort: Sort::Scalar, instances: &["inf * inf"] },
    DefaultLaw { name: "sc = inf off k x Gamma", sort: Sort::Vector, instances: &["sc(inf, y)", "sc(c, inf)", "sc(inf, inf)"] },
];

/// Evaluates every default law at every `(y, c)` pair and returns the
/// instances that did not yield `inf`.
pub fn infinity_default_failures<C: Couple>(c: &C, vectors: &[C::Elem], scalars: &[ScalarValue]) -> Vec<String> {
    let mut bad = Vec::new();
    for law in INFINITY_DEFAULTS {
        for text in law.instances {
            let ast = parse_term(text, law.sort).expect("default laws parse");
            for y in vectors {
                for q in scalars {
                    let asg = Assignment::default().with_vector("y", y.clone()).with_scalar("c", q.clone());
                    let is_inf = match &ast {
                        Ast::Vector(t) => matches!(eval_vterm(c, t, &asg), Ok(VVal::Inf)),
                        Ast::Scalar(t) => matches!(eval_sterm(c, t, &asg), Ok(ExtScalar::Infinity)),
                        Ast::Formula(_) => false,
                    };
                    if !is_inf {
                        bad.push(format!("{} at y = {y}, c = {q}", law.name));
                    }
                }
            }
        }
    }
    bad
}

/// Truth of a sentence in a model with `0 in P` and in one with `0 notin P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRow {
    pub sentence: String,
    pub above: Truth,
    pub below: Truth,
}

/// `Gamma_L` itself has `0 in P`; shifting ψ by `2 e0` moves every ψ-value
/// below `0` and yields a closed couple with `0 notin P`. Together they
/// represent both completions of the theory of closed H-triples.
pub fn compare_completions(sentences: &[Formula], budget: usize) -> Result<Vec<CompletionRow>, LangError> {
    let below = ShiftedLogModel::new(LogElement::e(0).scale(&ScalarValue::int(2)));
    sentences
        .iter()
        .map(|s| {
            Ok(CompletionRow {
                sentence: s.to_string(),
                above: eval_bounded(&LogModel, s, budget)?,
                below: eval_bounded(&below, s, budget)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couple::Presentation;
    use proptest::prelude::*;

    #[test]
    fn defaults_hold_in_small_models() {
        let p = Presentation::p2();
        let vs: Vec<_> = ["0", "b1", "-b2", "b1 + 1/2*b2"].iter().map(|s| p.parse_element(s).unwrap()).collect();
        let qs = [ScalarValue::zero(), ScalarValue::one(), ScalarValue::ratio(-3, 2)];
        assert!(infinity_default_failures(&p, &vs, &qs).is_empty());
    }

    #[test]
    fn the_two_completions_split_on_zero_in_p() {
        let s: Vec<Formula> = ["P(0)", "exists y. psi(y) < 0", "P(sc(2, 0))", "0 < inf"]
            .iter()
            .map(|t| parse_formula(t).unwrap())
            .collect();
        let rows = compare_completions(&s, 48).unwrap();
        assert_eq!((rows[0].above, rows[0].below), (Truth::True, Truth::False));
        assert_eq!((rows[1].above, rows[1].below), (Truth::Unknown, Truth::True));
        assert_eq!((rows[3].above, rows[3].below), (Truth::True, Truth::True));
    }

    fn var() -> impl Strategy<Value = String> {
        prop_oneof![Just("y".to_string()), Just("z".to_string())]
    }

    fn vterm() -> impl Strategy<Value = VTerm> {
        let leaf = prop_oneof![
            Just(VTerm::Zero),
            Just(VTerm::One),
            Just(VTerm::Inf),
            Just(VTerm::Const("e0 - e1".into())),
            var().prop_map(VTerm::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| VTerm::Neg(Box::new(t))),
                inner.clone().prop_map(|t| VTerm::Psi(Box::new(t))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| VTerm::Add(Box::new(a), Box::new(b))),
                (sterm_leaf(), inner).prop_map(|(s, t)| VTerm::Sc(Box::new(s), Box::new(t))),
            ]
        })
    }

    fn sterm_leaf() -> impl Strategy<Value = STerm> {
        prop_oneof![
            Just(STerm::Zero),
            Just(STerm::One),
            Just(STerm::Inf),
            (-4i64..5, 1i64..4).prop_map(|(n, d)| STerm::Const(ScalarValue::ratio(n, d))),
            Just(STerm::Var("c".into())),
        ]
    }

    fn sterm() -> impl Strategy<Value = STerm> {
        let leaf = prop_oneof![sterm_leaf(), (vterm(), vterm()).prop_map(|(a, b)| STerm::Colon(Box::new(a), Box::new(b)))];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| STerm::Neg(Box::new(t))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| STerm::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| STerm::Mul(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn formula() -> impl Strategy<Value = Formula> {
        let atom = prop_oneof![
            (vterm(), vterm()).prop_map(|(a, b)| Formula::VEq(a, b)),
            (vterm(), vterm()).prop_map(|(a, b)| Formula::VLt(a, b)),
            vterm().prop_map(Formula::P),
            (sterm(), sterm()).prop_map(|(a, b)| Formula::SLt(a, b)),
            (sterm(), sterm()).prop_map(|(a, b)| Formula::SEq(a, b)),
        ];
        atom.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
                inner.prop_map(|f| Formula::Exists(Binder { name: "y".into(), sort: Sort::Vector }, Box::new(f))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in formula()) {
            let text = f.to_string();
            let back = parse_formula(&text).unwrap();
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn evaluation_is_total(f in formula(), y in -3i64..4, q in -2i64..3) {
            let asg = Assignment::default()
                .with_vector("y", LogElement::term(1, ScalarValue::int(y)))
                .with_vector("z", LogElement::e(0))
                .with_scalar("c", ScalarValue::int(q));
            if f.is_quantifier_free() {
                prop_assert!(eval_qf(&LogModel, &f, &asg).is_ok());
            }
        }
    }
}
