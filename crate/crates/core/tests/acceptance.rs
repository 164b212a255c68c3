//! Runs the full verification suite at default budgets and prints one
//! pass/fail line per criterion.

use gwregion::verify::{run_criterion, VerifyOptions, CRITERIA};

const SEED: u64 = 7;

/// Wall-clock budget per criterion, in seconds.
const BUDGETS: [f64; CRITERIA as usize] = [1.0, 1.0, 30.0, 300.0, 5.0, 120.0, 30.0, 5.0, 120.0];

#[test]
fn acceptance_criteria() {
    let opts = VerifyOptions {
        seed: SEED,
        ..VerifyOptions::default()
    };
    let mut failures = Vec::new();
    for criterion in 1..=CRITERIA {
        let report = run_criterion(criterion, &opts);
        let secs = report.elapsed.as_secs_f64();
        let budget = BUDGETS[usize::from(criterion - 1)];
        for check in &report.checks {
            println!("  {}", check.report_line());
        }
        let ok = report.passed();
        println!(
            "criterion {criterion}: {} ({secs:.2} s, budget {budget} s)",
            if ok { "PASS" } else { "FAIL" }
        );
        if secs > budget {
            println!("criterion {criterion}: runtime exceeded budget");
        }
        if !ok {
            failures.push(criterion);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
