//! Base change of a presentation to Q(sqrt 2).

use hcouple::couple::Presentation;
use hcouple::extend::scalar_extend;
use hcouple::scalar::{ScalarField, ScalarValue};

fn main() {
    let p = Presentation::p2();
    let q = scalar_extend(&p, ScalarField::Quadratic(2)).expect("Q embeds in Q(sqrt 2)");
    println!("valid over {}: {}", ScalarField::Quadratic(2), q.validate().is_ok());
    let r2 = ScalarValue::sqrt(2).expect("square-free");
    let v = q.parse_vector("b1").expect("literal").scale(&r2);
    println!("psi(sqrt2 * b1) = {}", q.render(q.psi_of(&v).expect("nonzero")));
}
