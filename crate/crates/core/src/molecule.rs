//! Finitely supported elements `sum a_i delta(x_i)` of a free space over a pointed subset of
//! `R^d`, and the linear operators induced on them by base-point-preserving maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::basis_rd::shell_formula;
use crate::dyadic::{Dyadic, Rational};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Point};
use crate::interpolation::lambda_weights;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SpaceKind {
    /// All of `R^d`.
    Full,
    /// `[0, 1]^d`.
    Cube,
    /// `B_t = { ||x||_inf <= t }`.
    Ball { radius: Dyadic },
    /// An explicit finite set.
    Finite { points: BTreeSet<Point> },
}

/// A pointed subset of `R^d` (sup metric).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    dim: usize,
    base: Point,
}

impl SpaceDescriptor {
    pub fn full(dim: usize) -> Self {
        SpaceDescriptor { kind: SpaceKind::Full, dim, base: Point::origin(dim) }
    }

    pub fn unit_cube(dim: usize) -> Self {
        SpaceDescriptor { kind: SpaceKind::Cube, dim, base: Point::origin(dim) }
    }

    pub fn ball(dim: usize, radius: Dyadic) -> Result<Self> {
        if radius.signum() <= 0 {
            return Err(Error::Precondition(format!("ball radius must be positive, got {radius}")));
        }
        Ok(SpaceDescriptor { kind: SpaceKind::Ball { radius }, dim, base: Point::origin(dim) })
    }

    pub fn finite(points: impl IntoIterator<Item = Point>, base: Point) -> Result<Self> {
        let dim = base.dim();
        let mut set = BTreeSet::new();
        for p in points {
            base.check_dim(&p)?;
            set.insert(p);
        }
        set.insert(base.clone());
        Ok(SpaceDescriptor { kind: SpaceKind::Finite { points: set }, dim, base })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        match &self.kind {
            SpaceKind::Full => true,
            SpaceKind::Cube => {
                let one = Dyadic::one();
                x.coords().iter().all(|c| c.signum() >= 0 && *c <= one)
            }
            SpaceKind::Ball { radius } => x.sup_norm() <= *radius,
            SpaceKind::Finite { points } => points.contains(x),
        }
    }

    pub fn check(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideSpace { point: x.to_string(), space: self.to_string() });
        }
        Ok(())
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::Full => write!(f, "R^{}", self.dim),
            SpaceKind::Cube => write!(f, "[0,1]^{}", self.dim),
            SpaceKind::Ball { radius } => write!(f, "B_{radius} in R^{}", self.dim),
            SpaceKind::Finite { points } => {
                write!(f, "finite set of {} points in R^{} based at {}", points.len(), self.dim, self.base)
            }
        }
    }
}

/// A canonical finite combination of point masses: no zero coefficients and no entry at the
/// base point, whose point mass vanishes in the free space.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Molecule {
    space: SpaceDescriptor,
    terms: BTreeMap<Point, Rational>,
}

impl Molecule {
    pub fn zero(space: SpaceDescriptor) -> Self {
        Molecule { space, terms: BTreeMap::new() }
    }

    /// Merge duplicates, drop zeros and base-point entries.
    pub fn canonicalize(
        terms: impl IntoIterator<Item = (Point, Rational)>,
        space: SpaceDescriptor,
    ) -> Result<Self> {
        let mut acc: BTreeMap<Point, Rational> = BTreeMap::new();
        for (x, a) in terms {
            space.check(&x)?;
            *acc.entry(x).or_insert_with(Rational::zero) += a;
        }
        acc.remove(&space.base);
        acc.retain(|_, a| !a.is_zero());
        Ok(Molecule { space, terms: acc })
    }

    pub fn delta(space: SpaceDescriptor, x: Point) -> Result<Self> {
        Self::canonicalize([(x, Rational::one())], space)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn base(&self) -> &Point {
        &self.space.base
    }

    pub fn terms(&self) -> &BTreeMap<Point, Rational> {
        &self.terms
    }

    pub fn coeff(&self, x: &Point) -> Rational {
        self.terms.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &Point> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum a_i`, the coefficient mass (the base point carries whatever balances it).
    pub fn total_mass(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, a| acc + a)
    }

    fn check_same_space(&self, other: &Molecule) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!("{} vs {}", self.space, other.space)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Molecule) -> Result<Molecule> {
        self.check_same_space(other)?;
        let mut terms = self.terms.clone();
        for (x, a) in &other.terms {
            let e = terms.entry(x.clone()).or_insert_with(Rational::zero);
            *e += a;
            if e.is_zero() {
                terms.remove(x);
            }
        }
        Ok(Molecule { space: self.space.clone(), terms })
    }

    pub fn sub(&self, other: &Molecule) -> Result<Molecule> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Molecule {
        if c.is_zero() {
            return Molecule::zero(self.space.clone());
        }
        let terms = self.terms.iter().map(|(x, a)| (x.clone(), a * c)).collect();
        Molecule { space: self.space.clone(), terms }
    }

    pub fn neg(&self) -> Molecule {
        let terms = self.terms.iter().map(|(x, a)| (x.clone(), -a)).collect();
        Molecule { space: self.space.clone(), terms }
    }

    /// The same terms viewed in another space with the same base point (linearized inclusion).
    pub fn embed(&self, space: SpaceDescriptor) -> Result<Molecule> {
        let inclusion = TabulatedMap::new(self.space.clone(), space, MapRule::Identity)?;
        self.pushforward(&inclusion)
    }

    /// `sum a_i delta(f(x_i))` in the codomain of `f`.
    pub fn pushforward(&self, f: &TabulatedMap) -> Result<Molecule> {
        if self.space != f.domain {
            return Err(Error::SpaceMismatch(format!(
                "molecule lives in {}, map is defined on {}",
                self.space, f.domain
            )));
        }
        let mut image = Vec::with_capacity(self.terms.len());
        for (x, a) in &self.terms {
            image.push((f.apply(x)?, a.clone()));
        }
        Molecule::canonicalize(image, f.codomain.clone())
    }

    /// The lattice image `sum_i a_i sum_v Lambda_R(v, x_i) delta(v)` before dropping the base
    /// entry, so that coefficient mass can be audited.
    pub fn lattice_terms(&self, grid: &GridSpec) -> Result<BTreeMap<Point, Rational>> {
        let mut acc: BTreeMap<Point, Rational> = BTreeMap::new();
        for (x, a) in &self.terms {
            for (v, w) in lambda_weights(x, grid)?.into_entries() {
                *acc.entry(v).or_insert_with(Rational::zero) += a * w.to_rational();
            }
        }
        Ok(acc)
    }

    /// The retraction onto lattice-supported molecules: `delta(x) -> sum_v Lambda_R(v,x) delta(v)`.
    pub fn retract(&self, grid: &GridSpec) -> Result<Molecule> {
        self.check_grid(grid)?;
        Molecule::canonicalize(self.lattice_terms(grid)?, self.space.clone())
    }

    /// Linearization of the coordinatewise clamp `x_i -> sgn(x_i) min(|x_i|, t)`, landing in `B_t`.
    pub fn clamp_linearized(&self, t: &Dyadic) -> Result<Molecule> {
        let ball = SpaceDescriptor::ball(self.dim(), t.clone())?;
        let clamp = TabulatedMap::new(self.space.clone(), ball, MapRule::Clamp(t.clone()))?;
        self.pushforward(&clamp)
    }

    /// `P_{t,R}`: `delta(x) -> sum_v Lambda_R(v, x) delta(r_t(v))`, requiring `t / R` in `N`.
    pub fn project(&self, t: &Dyadic, grid: &GridSpec) -> Result<Molecule> {
        self.check_grid(grid)?;
        let ratio = grid.to_grid_units(t);
        if !(ratio.is_integer() && ratio.signum() > 0) {
            return Err(Error::Precondition(format!(
                "t / R must be a positive integer (t = {t}, R = {})",
                grid.mesh()
            )));
        }
        let mut acc = Vec::new();
        for (v, c) in self.lattice_terms(grid)? {
            acc.push((clamp_point(&v, t), c));
        }
        Molecule::canonicalize(acc, self.space.clone())
    }

    /// `sum a_i f(x_i)` for a function tabulated on the support and the base point.
    pub fn pair(&self, f: &BTreeMap<Point, Rational>) -> Result<Rational> {
        match f.get(self.base()) {
            Some(v) if v.is_zero() => {}
            Some(v) => {
                return Err(Error::Precondition(format!("f(base) must vanish, got {v}")));
            }
            None => return Err(Error::Precondition("f is not defined at the base point".into())),
        }
        let mut acc = Rational::zero();
        for (x, a) in &self.terms {
            let fx = f.get(x).ok_or_else(|| Error::Precondition(format!("f is not defined at {x}")))?;
            acc += a * fx;
        }
        Ok(acc)
    }

    /// `sum |a_i|`.
    pub fn l1_mass(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |acc, a| acc + a.abs())
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: grid.dim() });
        }
        Ok(())
    }
}

/// Coordinatewise clamp `r_t`.
pub fn clamp_point(x: &Point, t: &Dyadic) -> Point {
    let neg_t = -t;
    x.map(|c| {
        if c > t {
            t.clone()
        } else if *c < neg_t {
            neg_t.clone()
        } else {
            c.clone()
        }
    })
}

/// Rules for [`TabulatedMap`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MapRule {
    Identity,
    /// Coordinatewise clamp to `[-t, t]`.
    Clamp(Dyadic),
    /// One step of the shell map at the given level: `x_i -> sgn(x_i) min(||x|| - 2^-n, |x_i|)`.
    Shell { level: u32 },
    /// Explicit table; points missing from it are rejected.
    Table(BTreeMap<Point, Point>),
}

/// A base-point-preserving map between pointed spaces, applied pointwise to molecules.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TabulatedMap {
    domain: SpaceDescriptor,
    codomain: SpaceDescriptor,
    rule: MapRule,
}

impl TabulatedMap {
    pub fn new(domain: SpaceDescriptor, codomain: SpaceDescriptor, rule: MapRule) -> Result<Self> {
        if domain.dim != codomain.dim {
            return Err(Error::DimensionMismatch { expected: domain.dim, found: codomain.dim });
        }
        let map = TabulatedMap { domain, codomain, rule };
        let image = map.apply_rule(&map.domain.base)?;
        if image != map.codomain.base {
            return Err(Error::Precondition(format!(
                "map sends base {} to {image}, not to {}",
                map.domain.base, map.codomain.base
            )));
        }
        Ok(map)
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        TabulatedMap { codomain: space.clone(), domain: space, rule: MapRule::Identity }
    }

    pub fn domain(&self) -> &SpaceDescriptor {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceDescriptor {
        &self.codomain
    }

    fn apply_rule(&self, x: &Point) -> Result<Point> {
        Ok(match &self.rule {
            MapRule::Identity => x.clone(),
            MapRule::Clamp(t) => clamp_point(x, t),
            MapRule::Shell { level } => shell_formula(x, *level),
            MapRule::Table(table) => table
                .get(x)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("map is not tabulated at {x}")))?,
        })
    }

    /// Image of `x`, which must lie in the domain; the image must lie in the codomain.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.domain.check(x)?;
        let y = self.apply_rule(x)?;
        self.codomain.check(&y)?;
        Ok(y)
    }
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
    fn mol(space: &SpaceDescriptor, terms: &[(&[&str], i64)]) -> Molecule {
        Molecule::canonicalize(terms.iter().map(|(x, a)| (p(x), q(*a, 1))), space.clone()).unwrap()
    }

    #[test]
    fn canonical_form() {
        let s = SpaceDescriptor::full(1);
        assert!(mol(&s, &[(&["1/2"], 2), (&["1/2"], -2)]).is_zero());
        assert!(mol(&s, &[(&["0"], 5)]).is_zero());
        let m = mol(&s, &[(&["1"], 1), (&["2"], 1), (&["1"], 3)]);
        assert_eq!(m.coeff(&p(&["1"])), q(4, 1));
        assert_eq!(m.coeff(&p(&["2"])), q(1, 1));
        assert_eq!(m.len(), 2);
        let cube = SpaceDescriptor::unit_cube(1);
        assert!(Molecule::delta(cube, p(&["2"])).is_err());
    }

    #[test]
    fn linear_structure() {
        let s = SpaceDescriptor::full(1);
        let m = mol(&s, &[(&["1"], 3), (&["-1/2"], 1)]);
        assert!(m.add(&m.scale(&q(-1, 1))).unwrap().is_zero());
        assert!(m.scale(&q(0, 1)).is_zero());
        let dx = mol(&s, &[(&["1/4"], 1)]);
        assert_eq!(dx.add(&dx).unwrap(), mol(&s, &[(&["1/4"], 2)]));
        let other = Molecule::zero(SpaceDescriptor::unit_cube(1));
        assert!(m.add(&other).is_err());
    }

    #[test]
    fn pushforward_rules() {
        let s = SpaceDescriptor::full(1);
        let m = mol(&s, &[(&["1"], 1), (&["-2"], 1)]);
        let cube_to_full = mol(&SpaceDescriptor::unit_cube(1), &[(&["1/2"], 1)]);
        let emb = cube_to_full.embed(s.clone()).unwrap();
        assert_eq!(emb.space(), &s);
        assert_eq!(emb.terms(), cube_to_full.terms());

        let big = m.clamp_linearized(&Dyadic::from_int(2)).unwrap();
        assert_eq!(big.terms(), m.terms());

        let mut table = BTreeMap::new();
        table.insert(p(&["0"]), p(&["0"]));
        table.insert(p(&["1"]), p(&["5"]));
        table.insert(p(&["2"]), p(&["5"]));
        let f = TabulatedMap::new(s.clone(), s.clone(), MapRule::Table(table)).unwrap();
        let collapsing = mol(&s, &[(&["1"], 1), (&["2"], -1)]);
        assert!(collapsing.pushforward(&f).unwrap().is_zero());
        assert!(m.pushforward(&f).is_err());

        let mut bad = BTreeMap::new();
        bad.insert(p(&["0"]), p(&["1"]));
        assert!(TabulatedMap::new(s.clone(), s, MapRule::Table(bad)).is_err());
    }

    #[test]
    fn clamp() {
        let s1 = SpaceDescriptor::full(1);
        let m = mol(&s1, &[(&["3"], 1)]);
        let c = m.clamp_linearized(&Dyadic::one()).unwrap();
        assert_eq!(c.terms().keys().collect::<Vec<_>>(), vec![&p(&["1"])]);
        let s2 = SpaceDescriptor::full(2);
        let m = mol(&s2, &[(&["3", "1/2"], 1)]);
        let c = m.clamp_linearized(&Dyadic::one()).unwrap();
        assert_eq!(c.terms().keys().collect::<Vec<_>>(), vec![&p(&["1", "1/2"])]);
        assert!(m.clamp_linearized(&Dyadic::zero()).is_err());
    }

    #[test]
    fn retract_examples() {
        let s = SpaceDescriptor::full(1);
        let g = GridSpec::dyadic(1, 0);
        let v = mol(&s, &[(&["2"], 1)]);
        assert_eq!(v.retract(&g).unwrap(), v);
        let m = mol(&s, &[(&["1/4"], 1)]);
        let r = m.retract(&g).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.coeff(&p(&["1"])), q(1, 4));
        let full = m.lattice_terms(&g).unwrap();
        assert_eq!(full.values().fold(Rational::zero(), |a, b| a + b), m.total_mass());
    }

    #[test]
    fn project_examples() {
        let s = SpaceDescriptor::full(1);
        let g = GridSpec::dyadic(1, 0);
        let m = mol(&s, &[(&["5/2"], 1)]);
        let pm = m.project(&Dyadic::one(), &g).unwrap();
        assert_eq!(pm, mol(&s, &[(&["1"], 1)]));
        let inside = mol(&s, &[(&["1"], 2), (&["-1"], 3)]);
        assert_eq!(inside.project(&Dyadic::one(), &g).unwrap(), inside);
        assert!(m.project(&"1/2".parse().unwrap(), &g).is_err());
    }

    #[test]
    fn pairing() {
        let s = SpaceDescriptor::full(1);
        let m = mol(&s, &[(&["3/4"], 1)]);
        let mut f = BTreeMap::new();
        f.insert(p(&["0"]), q(0, 1));
        f.insert(p(&["3/4"]), q(0, 1));
        assert_eq!(m.pair(&f).unwrap(), q(0, 1));
        f.insert(p(&["3/4"]), q(3, 4));
        assert_eq!(m.pair(&f).unwrap(), q(3, 4));
        f.remove(&p(&["0"]));
        assert!(m.pair(&f).is_err());
    }
}
