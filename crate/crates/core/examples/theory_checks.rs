//! Numeric checks of the concentration lemmas, plus the 64-case
//! enumeration showing why pseudo-rewards are needed.

use mbe::theorycheck::{enumerate_example1, run_all};

fn main() {
    let mut failed = 0;
    for r in run_all(1) {
        print!("{r}");
        failed += usize::from(!r.pass);
    }
    for lambda in [0.0, 0.5, 1e6] {
        let c = enumerate_example1(lambda);
        println!(
            "lambda={lambda}: worse arm ahead in {}/{} weight tuples ({} with both scores defined)",
            c.favorable, c.total, c.favorable_defined
        );
    }
    println!("{failed} check(s) failed");
}
