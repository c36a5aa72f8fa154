//! The three constructors on finite presentations.

use hcouple::couple::Presentation;
use hcouple::extend::{adjoin_psi_value, extend_grounded, insert_class};

fn main() {
    let p1 = Presentation::p1();
    let g = extend_grounded(&p1).expect("P1 is grounded");
    println!("grounded: adjoined {}, Psi = {:?}", g.extended.render(&g.adjoined), rendered(&g.extended));

    let p2 = Presentation::p2();
    let beta = p2.parse_vector("b1 + 1/2*b2").expect("literal");
    let ins = insert_class(&p2, 1, &beta).expect("beta lies between the psi-values");
    println!("insert: new class {}, Psi = {:?}", ins.new_basis_id, rendered(&ins.extended));

    let low = p2.parse_vector("-b1").expect("literal");
    let adj = adjoin_psi_value(&p2, &low).expect("-b1 is in the cut");
    println!("adjoin: {} kind, Psi = {:?}", adj.report.kind, rendered(&adj.extended));
}

fn rendered(p: &Presentation) -> Vec<String> {
    p.psi_values().into_iter().map(|v| p.render(v)).collect()
}
