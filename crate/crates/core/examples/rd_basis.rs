//! The basis of the free space over the line and the plane: shells, expansion, round trip.

use lipfree::basis_rd::{expand_rd, level_indices, reconstruct_rd, CutoffSequence};
use lipfree::{Molecule, Point, Rational, SpaceDescriptor};

fn main() -> lipfree::Result<()> {
    let k = CutoffSequence::default();
    println!("cutoffs {k}");
    for n in 0..=2 {
        let idx = level_indices(n, 1, &k)?;
        println!("level {n}: {} basis vectors on the line", idx.len());
    }

    let m = Molecule::canonicalize(
        [
            (Point::parse(&["5/2", "-1"])?, Rational::from_integer(1.into())),
            (Point::parse(&["1/2", "1/2"])?, Rational::new((-2).into(), 3.into())),
        ],
        SpaceDescriptor::full(2),
    )?;
    let coeffs = expand_rd(&m, 1, &k)?;
    for (idx, a) in coeffs.entries() {
        println!("{:?} at {}: {a}", idx.kind(), idx.point());
    }
    println!("round trip exact: {}", reconstruct_rd(&coeffs)? == m);
    Ok(())
}
