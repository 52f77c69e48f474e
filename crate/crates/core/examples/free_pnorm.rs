//! Free p-norms of a molecule for several p, by spanning-tree enumeration and subset DP.

use lipfree::pnorm::{exact_norm_with, NormOptions};
use lipfree::{exact_norm, GroundSet, Metric, Molecule, Point, Rational, SpaceDescriptor};

fn main() -> lipfree::Result<()> {
    let one = Rational::from_integer(1.into());
    let m = Molecule::canonicalize(
        [
            (Point::parse(&["1", "0"])?, one.clone()),
            (Point::parse(&["2", "1"])?, one.clone()),
            (Point::parse(&["0", "3"])?, -one),
        ],
        SpaceDescriptor::full(2),
    )?;
    let ground = GroundSet::from_support(&m);
    for p in [1.0, 2.0 / 3.0, 0.5] {
        let tree = exact_norm(&m, &ground, p)?;
        let dp = exact_norm_with(&m, &ground, p, &NormOptions::dp(12))?;
        let l1 = exact_norm(&m, &ground.clone().with_metric(Metric::L1), p)?;
        println!("p={p:.3}  sup: {:.6} (dp {:.6})  l1: {:.6}", tree.value, dp.value, l1.value);
    }
    Ok(())
}
