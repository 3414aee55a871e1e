//! The full acceptance suite. Every count is compared for exact equality;
//! criteria 1 and 5 also carry wall-clock limits of 60 s and 120 s.

use std::process::ExitCode;

use tbf::acceptance::{run_criteria, Suite};
use tbf::caps::caps_from_env;

fn main() -> ExitCode {
    let caps = match caps_from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::FAILURE;
        }
    };
    println!("acceptance (full suite, exact equality)");
    let results = run_criteria(Suite::Full, &caps);
    for r in &results {
        print!("{}", r.summary());
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass()).map(|r| r.id).collect();
    if results.len() != 8 || !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        return ExitCode::FAILURE;
    }
    println!("all 8 criteria pass");
    ExitCode::SUCCESS
}
