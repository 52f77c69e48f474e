//! Expansion of a molecule on `[0,1]^2` in the cube basis, truncations, and reconstruction.

use lipfree::basis_cube::{expand, reconstruct};
use lipfree::{GridSpec, Molecule, Point, Rational, SpaceDescriptor};

fn main() -> lipfree::Result<()> {
    let m = Molecule::canonicalize(
        [
            (Point::parse(&["1/4", "3/4"])?, Rational::new(3.into(), 2.into())),
            (Point::parse(&["1", "1/2"])?, Rational::from_integer((-1).into())),
        ],
        SpaceDescriptor::unit_cube(2),
    )?;
    let coeffs = expand(&m, 2)?;
    for (idx, a) in coeffs.entries() {
        println!("level {} at {}: {a}", idx.level, idx.point);
    }
    for n in 0..=2 {
        let partial = reconstruct(&coeffs.up_to_level(n))?;
        println!("levels <= {n} equal the mesh 2^-{n} retraction: {}", partial == m.retract(&GridSpec::dyadic(2, n as i64))?);
    }
    println!("round trip exact: {}", reconstruct(&coeffs)? == m);
    Ok(())
}
