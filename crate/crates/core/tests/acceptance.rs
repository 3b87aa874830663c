//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use latpdo::verify::{run_criterion, VerifyOptions, CRITERIA_COUNT, DEFAULT_SEED};

fn main() {
    let opts = VerifyOptions::new(DEFAULT_SEED);
    let mut failed = Vec::new();
    for id in 1..=CRITERIA_COUNT {
        let r = run_criterion(id, &opts);
        println!("{}", r.line());
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {CRITERIA_COUNT} criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
