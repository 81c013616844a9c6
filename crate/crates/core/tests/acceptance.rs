//! Runs every acceptance criterion at its stated trial count and tolerance
//! and prints one line per criterion. Exits non-zero if any fails.

use qrelkit::verify::{verify, SuiteConfig, SUITES};
use std::process::ExitCode;

const SEED: u64 = 42;

fn main() -> ExitCode {
    let mut failed = vec![];
    for (i, suite) in SUITES.iter().enumerate() {
        let report = match verify(&SuiteConfig::new(suite.name, SEED)) {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {:>2} ({}): FAIL {e}", i + 1, suite.name);
                failed.push(suite.name);
                continue;
            }
        };
        let s = &report.suites[0];
        let verdict = if s.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} ({}): {verdict} trials={} tol={:e} worst={:.3e}",
            i + 1,
            suite.name,
            s.trials,
            s.tol,
            s.worst
        );
        for t in s.results.iter().filter(|t| !t.ok) {
            println!("    trial {} seed {}: {}", t.index, t.seed, t.error.as_deref().unwrap_or("residual above tolerance"));
        }
        if !s.passed {
            failed.push(suite.name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", SUITES.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
