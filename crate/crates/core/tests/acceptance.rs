//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;
use thermoscope::acceptance::run_all;

fn main() -> ExitCode {
    let outcomes = run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
