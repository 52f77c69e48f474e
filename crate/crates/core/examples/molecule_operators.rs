//! Retraction onto a lattice, clamping, and the composed projection acting on a molecule.

use lipfree::{Dyadic, GridSpec, Molecule, Point, Rational, SpaceDescriptor};

fn show(m: &Molecule) -> String {
    if m.is_zero() {
        return "0".into();
    }
    m.terms().iter().map(|(x, a)| format!("{a} d{x}")).collect::<Vec<_>>().join(" + ")
}

fn main() -> lipfree::Result<()> {
    let space = SpaceDescriptor::full(1);
    let m = Molecule::canonicalize(
        [
            (Point::parse(&["3/4"])?, Rational::from_integer(2.into())),
            (Point::parse(&["-5/2"])?, Rational::from_integer((-1).into())),
        ],
        space,
    )?;
    let grid = GridSpec::dyadic(1, 0);
    let t: Dyadic = "2".parse()?;
    println!("m              = {}", show(&m));
    println!("retract (R=1)  = {}", show(&m.retract(&grid)?));
    println!("clamp (t=2)    = {}", show(&m.clamp_linearized(&t)?));
    println!("project (2, 1) = {}", show(&m.project(&t, &grid)?));
    Ok(())
}
