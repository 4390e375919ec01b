//! Acceptance criteria 1-11. Runs without the test harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fails.

use pshlab::suite::run_all;

fn main() {
    let results = run_all(0);
    for r in &results {
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("    failed: {} = {:e} > {:e}", c.quantity, c.value, c.tolerance);
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("acceptance: {passed} of {} passed", results.len());
    if passed < results.len() {
        std::process::exit(1);
    }
}
