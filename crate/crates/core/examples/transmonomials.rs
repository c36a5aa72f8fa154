//! Values of iterated exponentials: distinct archimedean classes and their psi.

use hcouple::analysis::span_rank;
use hcouple::model::Couple;
use hcouple::tmodel::{Monomial, TransModel};

fn main() {
    let t = TransModel;
    let ms: Vec<Monomial> = (1..=6).map(|c| format!("exp(exp({c}*x))").parse().expect("monomial")).collect();
    println!("rank of span = {}", span_rank(&t, &ms));
    let m: Monomial = "exp(3/2*exp(2*x))".parse().expect("monomial");
    println!("psi({m}) = {}", t.psi(&m).expect("nonzero"));
}
