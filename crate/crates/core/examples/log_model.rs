//! Integration in the log-monomial couple and the gap above its psi-values.

use hcouple::model::Couple;
use hcouple::tmodel::{sigma, GapCut, GapLogElement, GapLogModel, LogElement};

fn main() {
    for k in 0..4 {
        let gamma = if k == 0 { LogElement::zero() } else { sigma(k - 1) };
        println!("integral of {gamma} is {}", gamma.integrate());
    }
    let g = GapLogModel::new(GapCut::PsiDown);
    let lambda = GapLogElement::lambda();
    for k in [0, 5, 50] {
        let s: GapLogElement = sigma(k).into();
        println!("sigma_{k} < lambda: {}", g.cmp(&s, &lambda).is_lt());
    }
    println!("lambda in P: {}", g.in_cut(&lambda));
}
