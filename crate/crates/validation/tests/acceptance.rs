//! Runs every acceptance criterion, prints one line each and fails if any fails.

use std::process::ExitCode;

fn main() -> ExitCode {
    let verdicts = casimir_validation::all();
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed: Vec<u8> = verdicts.iter().filter(|v| !v.pass).map(|v| v.criterion).collect();
    println!("acceptance: {} of {} criteria pass", verdicts.len() - failed.len(), verdicts.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
