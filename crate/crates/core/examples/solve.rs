//! Invert gamma + psi(gamma) - 1/2 psi_(e1)(psi(gamma)) in the log couple.

use hcouple::analysis::{objective, solve_monotone, PsiIterSpec};
use hcouple::scalar::ScalarValue;
use hcouple::tmodel::{LogElement, LogModel};

fn main() {
    let spec = PsiIterSpec::new(vec![LogElement::zero(), LogElement::e(1)], vec![ScalarValue::one(), ScalarValue::ratio(-1, 2)])
        .expect("two terms");
    let gamma: LogElement = "2*e1 - e3".parse().expect("element");
    let tau = objective(&LogModel, &spec, &gamma).expect("in domain");
    let back = solve_monotone(&LogModel, &spec, &tau).expect("solvable");
    println!("f({gamma}) = {tau}; solving recovers {back}");
    assert_eq!(back, gamma);
}
