//! Parse, decide and search sentences of the two-sorted language.
//!
//! Pass sentences as arguments to decide them in the log couple.

use hcouple::lang::{bounded_exists, decide_qf, parse_formula, scalar_formula_terms, ExistsOutcome};
use hcouple::tmodel::LogModel;

fn main() {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        args = ["psi([e1]) = [-e0 - e1]", "P(sc(2, 1))", "exists y. y + psi(y) = 1", "(y : z) * (y : z) < 1 + 1"]
            .map(String::from)
            .to_vec();
    }
    for text in &args {
        let f = match parse_formula(text) {
            Ok(f) => f,
            Err(e) => {
                println!("{text}: {e}");
                continue;
            }
        };
        if !f.free_vars().is_empty() {
            let terms = scalar_formula_terms(&f).map(|ts| ts.len());
            println!("{f}: open; scalar terms {terms:?}");
        } else if f.is_quantifier_free() {
            println!("{f}: {}", decide_qf(&LogModel, &f).expect("closed"));
        } else {
            match bounded_exists(&LogModel, &f, 48, &[]) {
                Ok(ExistsOutcome::Witness(w)) => println!("{f}: witness {w}"),
                Ok(ExistsOutcome::UnknownWithinBudget) => println!("{f}: unknown within budget"),
                Err(e) => println!("{f}: {e}"),
            }
        }
    }
}
