//! One PASS/FAIL line per acceptance criterion. Exits 1 if any check fails.

use std::process::ExitCode;
use std::time::Instant;

use gwlocal_core::verify::{run_criterion, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let t = Instant::now();
        let r = run_criterion(c, DEFAULT_SEED);
        let tag = if r.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: expected {} | got {} ({:.2?})", r.criterion, r.expected, r.got, t.elapsed());
        if !r.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
