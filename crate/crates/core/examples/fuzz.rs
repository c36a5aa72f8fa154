//! A small reproducible run of every property suite.

use hcouple::fuzz::{run_suite, Suite};

fn main() {
    for s in Suite::ALL {
        let r = run_suite(s, 7, s.default_cases().min(200), 0);
        println!("{r}");
        assert!(r.passed());
    }
}
