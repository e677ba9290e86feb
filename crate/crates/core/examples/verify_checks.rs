//! Run every equivalence check on a small fuzzed corpus and print the
//! reports as the `verify` subcommand does.
//!
//! cargo run --release --example verify_checks -- [fuzz] [seed]

use irtfa::equivalence::{verify, CheckKind, FuzzPlan};

fn main() -> irtfa::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let fuzz = *args.first().unwrap_or(&40) as usize;
    let seed = *args.get(1).unwrap_or(&1);

    let reports = verify(&CheckKind::ALL, FuzzPlan::scaled(fuzz), seed)?;
    for r in &reports {
        println!(
            "{:<32} {:>5} {:>10.3e} <= {:<10.3e} {}",
            r.name,
            if r.passed { "ok" } else { "FAIL" },
            r.discrepancy,
            r.tolerance,
            r.sample
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", reports.len());
    Ok(())
}
