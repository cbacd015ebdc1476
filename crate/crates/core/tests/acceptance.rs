//! Runs every acceptance criterion and prints one line per criterion.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test -p spinwalk --test acceptance -- 2 9`.

use std::process::ExitCode;

use spinwalk::validation::{run_criterion, ValidationOptions, CRITERIA};

fn main() -> ExitCode {
    let mut ids: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if ids.is_empty() {
        ids = (1..=CRITERIA).collect();
    }
    let mut failed = Vec::new();
    for id in ids {
        let outcome = run_criterion(id, ValidationOptions::default());
        println!("{}", outcome.summary());
        for c in &outcome.checks {
            println!("    {}: {:.6e} (limit {:.3e})", c.label, c.value, c.limit);
        }
        for note in &outcome.notes {
            println!("    {note}");
        }
        if !outcome.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
