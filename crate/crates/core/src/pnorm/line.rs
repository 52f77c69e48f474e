//! The `p = 1` norm on the real line, `int |A(t)| dt`.

use num_traits::{Signed, Zero};

use crate::dyadic::{rational_to_f64, Rational};
use crate::error::{Error, Result};
use crate::molecule::Molecule;

/// Exact `F_1(R)` norm of a one-dimensional molecule:
/// `int |sum_{x_i > t} a_i - [t < b] sum_i a_i| dt` with base `b`.
pub fn line_f1_norm_exact(m: &Molecule) -> Result<Rational> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: m.dim() });
    }
    let b = m.base().coords()[0].to_rational();
    let total = m.total_mass();
    let mut marks: Vec<(Rational, Rational)> =
        m.terms().iter().map(|(x, a)| (x.coords()[0].to_rational(), a.clone())).collect();
    marks.push((b.clone(), Rational::zero()));
    marks.sort_by(|x, y| x.0.cmp(&y.0));
    // Sweep from the right: `above` is the mass strictly to the right of the current interval.
    let mut above = Rational::zero();
    let mut norm = Rational::zero();
    for k in (1..marks.len()).rev() {
        above += &marks[k].1;
        let (t0, t1) = (&marks[k - 1].0, &marks[k].0);
        if t0 == t1 {
            continue;
        }
        let a = if *t1 <= b { &above - &total } else { above.clone() };
        norm += a.abs() * (t1 - t0);
    }
    Ok(norm)
}

pub fn line_f1_norm(m: &Molecule) -> Result<f64> {
    Ok(rational_to_f64(&line_f1_norm_exact(m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Point;
    use crate::molecule::SpaceDescriptor;
    use num_bigint::BigInt;

    fn mol(terms: &[(i64, i64)]) -> Molecule {
        Molecule::canonicalize(
            terms.iter().map(|&(x, a)| (Point::from_ints(&[x]), Rational::from_integer(BigInt::from(a)))),
            SpaceDescriptor::full(1),
        )
        .unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(line_f1_norm(&mol(&[(1, 1), (2, 1)])).unwrap(), 3.0);
        assert_eq!(line_f1_norm(&mol(&[(1, 1), (2, -1)])).unwrap(), 1.0);
        assert_eq!(line_f1_norm(&mol(&[(-2, 1), (3, 1)])).unwrap(), 5.0);
        assert_eq!(line_f1_norm(&mol(&[(-2, 1), (3, -1)])).unwrap(), 5.0);
        assert_eq!(line_f1_norm(&mol(&[])).unwrap(), 0.0);
    }
}
