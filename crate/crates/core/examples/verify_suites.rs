//! Run every property suite in dimensions 1 and 2 and print the failing checks.
//!
//! `cargo run --release --example verify_suites [seed]`

use std::time::Instant;

use lipfree::verify::{run_suite, Suite, SuiteConfig};

fn main() -> lipfree::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    for d in [1, 2] {
        for suite in Suite::EACH {
            let cfg = SuiteConfig { d, seed, ..Default::default() };
            let start = Instant::now();
            let report = run_suite(suite, &cfg)?;
            println!(
                "d={d} {:<12} {} checks, {} ({:.1?})",
                suite.name(),
                report.checks.len(),
                if report.passed { "pass" } else { "FAIL" },
                start.elapsed()
            );
            for c in report.failures() {
                println!("    {} measured {} bound {}", c.name, c.measured, c.bound);
            }
            for o in &report.observations {
                println!("    {} = {:.6} (ref {:.6})", o.name, o.value, o.reference);
            }
        }
    }
    Ok(())
}
