//! Build the two-class presentation, check its axioms, and print it.

use hcouple::couple::Presentation;
use hcouple::format::presentation_to_string;
use hcouple::model::Couple;

fn main() {
    let p = Presentation::p2();
    let report = p.validate();
    println!("{}: {}", p.name(), if report.is_ok() { "valid" } else { "invalid" });
    for v in p.psi_values() {
        println!("psi-value {}", p.render(v));
    }
    let a = p.parse_vector("b1 - 7*b2").expect("literal");
    println!("psi(b1 - 7*b2) = {}", p.render(p.psi_of(&a).expect("nonzero")));
    println!("{}", presentation_to_string(&p));
}
