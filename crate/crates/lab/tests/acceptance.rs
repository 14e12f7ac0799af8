//! Runs the eleven acceptance criteria and prints one line per criterion.

use std::process::ExitCode;

use kdv5_lab::suite;

fn main() -> ExitCode {
    let seed = std::env::var("KDV5_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    println!("acceptance suite, seed {seed}");
    let results = suite::run_all(seed, |c| println!("{}", c.line()));
    let failed = results.iter().filter(|c| !c.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
