//! Measure the Lipschitz constant of the lattice retraction on the standard four-cube patches.
//!
//! Run with `cargo run --release --example retraction_probe`.

use std::time::Instant;

use lipfree::retraction::{lipschitz_probe, Patch, ProbeConfig};

fn main() -> lipfree::Result<()> {
    for d in [1, 2] {
        let patch = Patch::standard(d)?;
        for p in [1.0, 2.0 / 3.0, 0.5] {
            let start = Instant::now();
            let r = lipschitz_probe(&patch, &ProbeConfig { p, ..Default::default() })?;
            println!(
                "d={d} p={p:.4} pairs={} measured={:.6} nominal={:.6} envelope={:.6} l1={:.6} chain={:.6}/{} within-excess={:.3e} ({:.1?})",
                r.samples,
                r.measured_max,
                r.nominal_constant,
                r.envelope,
                r.measured_l1_max,
                r.chain_ratio_max,
                r.chain_bound,
                r.within_cube_max_excess,
                start.elapsed()
            );
            println!("  argmax {} {}", r.argmax_pair.0, r.argmax_pair.1);
        }
    }
    Ok(())
}
