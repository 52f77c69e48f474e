//! The Schauder basis of the free p-space over `[0,1]^d`.
//!
//! With `V_n = [0,1]^d ∩ 2^-n Z^d` and `V_{-1} = {0}`, each `x` in `V_n \ V_{n-1}` carries the
//! basis vector
//!
//! ```text
//! f(x) = delta(x) - sum_{v in V_{n-1}} Lambda_{2^(1-n)}(v, x) delta(v)
//! ```
//!
//! and vectors are arranged by level, then lexicographically by point. The coefficient of
//! `f(x)` in a molecule `m` is the coefficient of `delta(x)` in `retract(m, 2^-n)`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::dyadic::Rational;
use crate::error::{Error, Result};
use crate::grid::{lattice_box, GridSpec, Point};
use crate::interpolation::lambda_weights;
use crate::molecule::{Molecule, SpaceDescriptor};

/// Level of a point of `[0,1]^d`: the least `n >= 0` with `x` in `2^-n Z^d`, or `-1` at the
/// origin.
pub fn alpha(x: &Point) -> Result<i64> {
    let cube = SpaceDescriptor::unit_cube(x.dim());
    cube.check(x)?;
    if x.is_origin() {
        return Ok(-1);
    }
    Ok(x.coords().iter().map(|c| c.exponent() as i64).max().unwrap_or(0))
}

/// `V_n` in lexicographic order.
pub fn level_points(n: i64, d: usize) -> Result<Vec<Point>> {
    if n < -1 {
        return Err(Error::InvalidIndex(format!("level must be at least -1, got {n}")));
    }
    if n == -1 {
        return Ok(vec![Point::origin(d)]);
    }
    Ok(lattice_box(d, n as u32, 0, 1 << n))
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CubeBasisIndex {
    pub level: u32,
    pub point: Point,
}

impl CubeBasisIndex {
    pub fn new(level: u32, point: Point) -> Result<Self> {
        match alpha(&point) {
            Ok(a) if a == level as i64 => Ok(CubeBasisIndex { level, point }),
            Ok(a) => Err(Error::InvalidIndex(format!(
                "{point} has level {a}, not {level}"
            ))),
            Err(_) => Err(Error::InvalidIndex(format!("{point} is not in the unit cube"))),
        }
    }

    /// The index attached to a nonzero point of the dyadic cube lattice.
    pub fn of_point(point: Point) -> Result<Self> {
        let a = alpha(&point).map_err(|_| Error::InvalidIndex(format!("{point} is not in the unit cube")))?;
        if a < 0 {
            return Err(Error::InvalidIndex("the origin carries no basis vector".into()));
        }
        Ok(CubeBasisIndex { level: a as u32, point })
    }
}

/// `f(x)` as a molecule over `[0,1]^d`.
pub fn basis_vector(idx: &CubeBasisIndex) -> Result<Molecule> {
    let idx = CubeBasisIndex::new(idx.level, idx.point.clone())?;
    let space = SpaceDescriptor::unit_cube(idx.point.dim());
    let mut terms = vec![(idx.point.clone(), Rational::from_integer(1.into()))];
    if idx.level > 0 {
        let coarse = GridSpec::dyadic(idx.point.dim(), idx.level as i64 - 1);
        for (v, w) in lambda_weights(&idx.point, &coarse)?.into_entries() {
            terms.push((v, -w.to_rational()));
        }
    }
    Molecule::canonicalize(terms, space)
}

/// All indices of level at most `depth`, in arrangement order.
pub fn arrangement(depth: u32, d: usize) -> Vec<CubeBasisIndex> {
    let mut out = Vec::new();
    for n in 0..=depth {
        for x in lattice_box(d, n, 0, 1 << n) {
            if alpha(&x).ok() == Some(n as i64) {
                out.push(CubeBasisIndex { level: n, point: x });
            }
        }
    }
    out
}

/// Nonzero coefficients in arrangement order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CubeBasisCoefficients {
    dim: usize,
    entries: Vec<(CubeBasisIndex, Rational)>,
}

impl CubeBasisCoefficients {
    /// Sorts entries, merges repeats and drops zeros.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (CubeBasisIndex, Rational)>) -> Result<Self> {
        let mut acc: BTreeMap<CubeBasisIndex, Rational> = BTreeMap::new();
        for (idx, c) in entries {
            if idx.point.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: idx.point.dim() });
            }
            let idx = CubeBasisIndex::new(idx.level, idx.point)?;
            *acc.entry(idx).or_insert_with(Rational::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(CubeBasisCoefficients { dim, entries: acc.into_iter().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(CubeBasisIndex, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &CubeBasisIndex) -> Rational {
        self.entries
            .binary_search_by(|(i, _)| i.cmp(idx))
            .map(|k| self.entries[k].1.clone())
            .unwrap_or_default()
    }

    /// Entries strictly before `arrangement[j]`: the coefficients of the `j`-th partial sum.
    pub fn prefix(&self, arrangement: &[CubeBasisIndex], j: usize) -> Self {
        let entries = match arrangement.get(j) {
            Some(stop) => self.entries.iter().filter(|(i, _)| i < stop).cloned().collect(),
            None => self.entries.clone(),
        };
        CubeBasisCoefficients { dim: self.dim, entries }
    }

    /// Entries of level at most `n`.
    pub fn up_to_level(&self, n: u32) -> Self {
        let entries = self.entries.iter().filter(|(i, _)| i.level <= n).cloned().collect();
        CubeBasisCoefficients { dim: self.dim, entries }
    }
}

fn check_support(m: &Molecule, depth: u32) -> Result<()> {
    let grid = GridSpec::dyadic(m.dim(), depth as i64);
    for x in m.support() {
        if grid.lattice_coords(x)?.is_none() {
            return Err(Error::Precondition(format!("{x} is not in V_{depth}")));
        }
    }
    Ok(())
}

/// Coefficients of a molecule over `[0,1]^d` supported on `V_depth`.
pub fn expand(m: &Molecule, depth: u32) -> Result<CubeBasisCoefficients> {
    let cube = SpaceDescriptor::unit_cube(m.dim());
    if m.space() != &cube {
        return Err(Error::SpaceMismatch(format!("expected {cube}, got {}", m.space())));
    }
    check_support(m, depth)?;
    let mut entries = Vec::new();
    for n in 0..=depth {
        let grid = GridSpec::dyadic(m.dim(), n as i64);
        for (x, c) in m.lattice_terms(&grid)? {
            if !c.is_zero() && alpha(&x)? == n as i64 {
                entries.push((CubeBasisIndex { level: n, point: x }, c));
            }
        }
    }
    CubeBasisCoefficients::new(m.dim(), entries)
}

/// `sum c f(x)` over the entries.
pub fn reconstruct(coeffs: &CubeBasisCoefficients) -> Result<Molecule> {
    let space = SpaceDescriptor::unit_cube(coeffs.dim);
    let mut terms: Vec<(Point, Rational)> = Vec::new();
    for (idx, c) in &coeffs.entries {
        for (x, a) in basis_vector(idx)?.terms() {
            terms.push((x.clone(), a * c));
        }
    }
    Molecule::canonicalize(terms, space)
}

/// The `j`-th partial sum of the expansion of `m` along `arrangement`.
pub fn partial_sum(m: &Molecule, depth: u32, arrangement: &[CubeBasisIndex], j: usize) -> Result<Molecule> {
    reconstruct(&expand(m, depth)?.prefix(arrangement, j))
}

/// `Q_{n,F}` on the block spanned by `f(x)`, `x` in `V_n \ V_{n-1}`: keeps the components
/// indexed by `F` and kills the others.
///
/// Evaluated as `sum_x (T_n m)_x r_{n,F}(x)`, where `r_{n,F}(x) = delta(x)` on `F` and
/// `T_{n-1} delta(x)` elsewhere.
pub fn block_projection(n: u32, f: &BTreeSet<Point>, m: &Molecule) -> Result<Molecule> {
    for x in f {
        CubeBasisIndex::new(n, x.clone())?;
    }
    let coeffs = expand(m, n).map_err(|e| match e {
        Error::Precondition(msg) => Error::NotInBlock(msg),
        e => e,
    })?;
    if let Some((idx, _)) = coeffs.entries.iter().find(|(i, _)| i.level != n) {
        return Err(Error::NotInBlock(format!(
            "component at {} of level {} is outside block {n}",
            idx.point, idx.level
        )));
    }
    let fine = GridSpec::dyadic(m.dim(), n as i64);
    let coarse = (n > 0).then(|| GridSpec::dyadic(m.dim(), n as i64 - 1));
    let mut terms: Vec<(Point, Rational)> = Vec::new();
    for (x, a) in m.retract(&fine)?.terms() {
        match (&coarse, f.contains(x)) {
            (Some(g), false) => {
                for (v, w) in lambda_weights(x, g)?.into_entries() {
                    terms.push((v, a * w.to_rational()));
                }
            }
            (None, false) => {}
            (_, true) => terms.push((x.clone(), a.clone())),
        }
    }
    Molecule::canonicalize(terms, m.space().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn p(c: &[&str]) -> Point {
        Point::parse(c).unwrap()
    }
    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }
    fn idx(level: u32, c: &[&str]) -> CubeBasisIndex {
        CubeBasisIndex::new(level, p(c)).unwrap()
    }

    #[test]
    fn levels() {
        assert_eq!(level_points(0, 1).unwrap(), vec![p(&["0"]), p(&["1"])]);
        assert_eq!(level_points(1, 2).unwrap().len(), 9);
        assert_eq!(level_points(-1, 3).unwrap(), vec![Point::origin(3)]);
        assert_eq!(alpha(&p(&["1/2", "1"])).unwrap(), 1);
        assert_eq!(alpha(&p(&["0", "0"])).unwrap(), -1);
        assert!(CubeBasisIndex::new(1, p(&["1"])).is_err());
    }

    #[test]
    fn arrangements() {
        assert_eq!(arrangement(0, 1), vec![idx(0, &["1"])]);
        assert_eq!(arrangement(1, 1), vec![idx(0, &["1"]), idx(1, &["1/2"])]);
        assert_eq!(arrangement(1, 2).len(), 8);
        assert_eq!(arrangement(3, 2).len(), 80);
    }

    #[test]
    fn basis_vectors() {
        let f = basis_vector(&idx(0, &["1", "1"])).unwrap();
        assert_eq!(f.len(), 1);
        let f = basis_vector(&idx(1, &["1/2"])).unwrap();
        assert_eq!(f.coeff(&p(&["1/2"])), q(1, 1));
        assert_eq!(f.coeff(&p(&["1"])), q(-1, 2));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn expand_examples() {
        let cube = SpaceDescriptor::unit_cube(1);
        let m = Molecule::delta(cube.clone(), p(&["1/2"])).unwrap();
        let c = expand(&m, 1).unwrap();
        assert_eq!(c.entries(), &[(idx(0, &["1"]), q(1, 2)), (idx(1, &["1/2"]), q(1, 1))]);
        assert_eq!(reconstruct(&c).unwrap(), m);
        let m = Molecule::delta(cube.clone(), p(&["3/8"])).unwrap();
        let c = expand(&m, 3).unwrap();
        assert_eq!(c.entries().last().unwrap(), &(idx(3, &["3/8"]), q(1, 1)));
        assert_eq!(reconstruct(&c).unwrap(), m);
        assert!(expand(&Molecule::zero(cube.clone()), 2).unwrap().is_empty());
        assert!(expand(&m, 2).is_err());
    }

    #[test]
    fn truncation_is_retraction() {
        let cube = SpaceDescriptor::unit_cube(2);
        let m = Molecule::canonicalize(
            [(p(&["3/8", "1/4"]), q(2, 3)), (p(&["1", "7/8"]), q(-1, 1))],
            cube,
        )
        .unwrap();
        let c = expand(&m, 3).unwrap();
        for n in 0..=3 {
            let r = m.retract(&GridSpec::dyadic(2, n as i64)).unwrap();
            assert_eq!(reconstruct(&c.up_to_level(n)).unwrap(), r);
        }
    }

    #[test]
    fn block_projection_filters() {
        let f0 = basis_vector(&idx(2, &["1/4", "1/2"])).unwrap();
        let f1 = basis_vector(&idx(2, &["3/4", "1"])).unwrap();
        let m = f0.add(&f1).unwrap();
        let keep: BTreeSet<Point> = [p(&["1/4", "1/2"])].into();
        assert_eq!(block_projection(2, &keep, &m).unwrap(), f0);
        assert!(block_projection(2, &BTreeSet::new(), &m).unwrap().is_zero());
        let all: BTreeSet<Point> = [p(&["1/4", "1/2"]), p(&["3/4", "1"])].into();
        assert_eq!(block_projection(2, &all, &m).unwrap(), m);
        let outside = Molecule::delta(SpaceDescriptor::unit_cube(2), p(&["1/4", "1/2"])).unwrap();
        assert!(matches!(block_projection(2, &keep, &outside), Err(Error::NotInBlock(_))));
    }
}
