//! Lazy H-closure: integrate repeatedly from P1 and replay the history.

use hcouple::closure::ClosureEngine;
use hcouple::couple::Presentation;
use hcouple::format::presentation_to_string;

fn main() {
    let mut e = ClosureEngine::new(Presentation::p1()).expect("valid seed");
    let mut gamma = e.stage().unit().clone();
    for _ in 0..4 {
        let alpha = e.integrate(&gamma).expect("gamma lies in the cut");
        println!("integral of {} is {}", e.stage().render(&gamma), e.stage().render(&alpha));
        gamma = e.stage().max_psi().expect("grounded").clone();
    }
    let history = e.history_json();
    let again = ClosureEngine::replay(Presentation::p1(), &history).expect("own history replays");
    assert_eq!(presentation_to_string(again.stage()), presentation_to_string(e.stage()));
    println!("{} stages, replay identical", e.stages().len());
}
