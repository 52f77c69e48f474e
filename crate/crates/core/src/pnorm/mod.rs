//! Free p-norms of molecules over finite pointed ground sets, `0 < p <= 1`.
//!
//! The norm of `m` over a finite set `S` is the infimum of `(sum_j |b_j|^p d(x_j, y_j)^p)^(1/p)`
//! over all representations `m = sum_j b_j (delta(x_j) - delta(y_j))` with `x_j, y_j` in `S`.
//!
//! Writing a representation as a flow on the complete graph over `S` whose divergence at each
//! node is the coefficient of the molecule (the base absorbs the balance), the feasible flows
//! of a fixed sign pattern form a polyhedron and the cost is concave on it, so the minimum is
//! attained at an extreme point. Extreme flows are supported on forests, and a forest extends
//! to a spanning tree with zero flow on the added edges at no extra cost. The minimum is
//! therefore the minimum over spanning trees of the cost of the unique flow that tree carries.
//!
//! Two exact routes evaluate that minimum:
//!
//! - [`NormMethod::PruferEnumeration`] decodes every labeled tree from its Prüfer sequence
//!   (`n^(n-2)` trees). Ties go to the lexicographically smallest sequence.
//! - [`NormMethod::SubsetDp`] minimizes over rooted trees with a dynamic program over subsets
//!   (about `n 3^(n-1)` steps), fast enough for the exhaustive Lipschitz probes.
//!
//! Both evaluate costs from the same per-subset flow table; each edge of a tree carries the
//! coefficient mass of the subtree it cuts off, `|s(T)|`.

pub(crate) mod dp;
mod line;
mod prufer;

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::dyadic::{common_denominator, rational_to_f64, Dyadic, Rational};
use crate::error::{Error, Result};
use crate::grid::{l1_dist, sup_dist, Point};
use crate::molecule::{Molecule, SpaceKind};

pub use line::{line_f1_norm, line_f1_norm_exact};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Sup,
    L1,
}

impl Metric {
    pub fn distance(&self, x: &Point, y: &Point) -> Result<Dyadic> {
        match self {
            Metric::Sup => sup_dist(x, y),
            Metric::L1 => l1_dist(x, y),
        }
    }
}

/// A finite pointed metric space. Non-base points are kept in sorted order and the base point
/// is placed last; that labeling fixes the Prüfer tie-break.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroundSet {
    points: Vec<Point>,
    metric: Metric,
}

impl GroundSet {
    pub fn new(points: impl IntoIterator<Item = Point>, base: Point, metric: Metric) -> Result<Self> {
        let mut pts: Vec<Point> = Vec::new();
        for p in points {
            base.check_dim(&p)?;
            if p != base {
                pts.push(p);
            }
        }
        pts.sort();
        if pts.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("ground set points must be distinct".into()));
        }
        pts.push(base);
        Ok(GroundSet { points: pts, metric })
    }

    /// `supp(m)` together with the base point.
    pub fn from_support(m: &Molecule) -> Self {
        GroundSet::new(m.support().cloned(), m.base().clone(), Metric::Sup)
            .expect("support points are distinct")
    }

    /// The explicit point list of a finite-set space.
    pub fn from_space(m: &Molecule) -> Result<Self> {
        match m.space().kind() {
            SpaceKind::Finite { points } => {
                GroundSet::new(points.iter().cloned(), m.base().clone(), Metric::Sup)
            }
            _ => Err(Error::Precondition(format!("{} is not a finite set", m.space()))),
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    /// Add points (duplicates and the base are ignored).
    pub fn augmented(&self, extra: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut pts: std::collections::BTreeSet<Point> = self.points.iter().cloned().collect();
        pts.extend(extra);
        GroundSet::new(pts, self.base().clone(), self.metric)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points in label order: sorted non-base points, then the base.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn base(&self) -> &Point {
        self.points.last().expect("ground set contains its base")
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn index_of(&self, x: &Point) -> Option<usize> {
        let n = self.points.len();
        if x == self.base() {
            return Some(n - 1);
        }
        self.points[..n - 1].binary_search(x).ok()
    }

    pub fn distance(&self, i: usize, j: usize) -> Dyadic {
        self.metric.distance(&self.points[i], &self.points[j]).expect("same dimension")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    #[default]
    PruferEnumeration,
    SubsetDp,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NormOptions {
    /// Largest ground set solved exactly; larger sets get bounds only.
    pub cap: usize,
    pub method: NormMethod,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { cap: 9, method: NormMethod::PruferEnumeration }
    }
}

impl NormOptions {
    pub fn dp(cap: usize) -> Self {
        NormOptions { cap, method: NormMethod::SubsetDp }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct NormResult {
    /// The exact norm, or the star-representation upper bound when `exact` is false.
    pub value: f64,
    pub p: f64,
    pub exact: bool,
    /// The `p = 1` value over the same ground set (a pairing lower bound when inexact).
    pub lower_bound: f64,
    /// Edges of an optimal spanning tree (empty when inexact).
    pub witness_tree: Vec<(Point, Point)>,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// Per-instance tables shared by both exact routes. Node `n - 1` is the base.
pub(crate) struct FlowTable {
    pub n: usize,
    /// `|s(T)|` for every subset `T` of the nodes, where `s` sums node divergences.
    pub mass: Vec<f64>,
    /// `d(i, j)` row-major.
    pub dist: Vec<f64>,
}

impl FlowTable {
    fn new(ground: &Instance) -> Self {
        let n = ground.divergence.len();
        let mass = subset_masses(&ground.divergence);
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = ground.set.distance(i, j).to_f64();
                }
            }
        }
        FlowTable { n, mass, dist }
    }

    /// Cost weights for exponent `p`: `|s(T)|^p` and `d(i,j)^p`.
    pub fn powered(&self, p: f64) -> (Vec<f64>, Vec<f64>) {
        let pw = |v: f64| if p == 1.0 { v } else { v.powf(p) };
        (self.mass.iter().map(|&v| pw(v)).collect(), self.dist.iter().map(|&v| pw(v)).collect())
    }
}

struct Instance<'a> {
    set: &'a GroundSet,
    divergence: Vec<Rational>,
}

/// `|sum_{i in T} a_i|` for every subset mask `T`, each rounded once from an exact value.
fn subset_masses(a: &[Rational]) -> Vec<f64> {
    let n = a.len();
    let size = 1usize << n;
    let den = common_denominator(a.iter());
    let scaled: Option<Vec<i64>> =
        a.iter().map(|r| (r.numer() * (&den / r.denom())).to_i64()).collect();
    let den_f = den.to_f64().filter(|v| v.is_finite());
    let mut out = vec![0.0; size];
    match (scaled, den_f) {
        (Some(ints), Some(df)) if n < 63 => {
            let mut sums = vec![0i128; size];
            for mask in 1..size {
                let low = mask.trailing_zeros() as usize;
                sums[mask] = sums[mask & (mask - 1)] + ints[low] as i128;
                out[mask] = (sums[mask] as f64).abs() / df;
            }
        }
        _ => {
            let mut sums = vec![Rational::zero(); size];
            for mask in 1..size {
                let low = mask.trailing_zeros() as usize;
                sums[mask] = &sums[mask & (mask - 1)] + &a[low];
                out[mask] = rational_to_f64(&sums[mask].abs());
            }
        }
    }
    out
}

fn check_inputs<'a>(m: &Molecule, ground: &'a GroundSet, p: f64) -> Result<Instance<'a>> {
    check_p(p)?;
    if ground.base() != m.base() {
        return Err(Error::Precondition(format!(
            "ground set base {} differs from molecule base {}",
            ground.base(),
            m.base()
        )));
    }
    let n = ground.len();
    let mut divergence = vec![Rational::zero(); n];
    for (x, a) in m.terms() {
        let i = ground
            .index_of(x)
            .ok_or_else(|| Error::Precondition(format!("support point {x} is not in the ground set")))?;
        divergence[i] = a.clone();
    }
    divergence[n - 1] = -m.total_mass();
    Ok(Instance { set: ground, divergence })
}

/// Exact free p-norm over `ground` with the default options (Prüfer enumeration, cap 9).
pub fn exact_norm(m: &Molecule, ground: &GroundSet, p: f64) -> Result<NormResult> {
    exact_norm_with(m, ground, p, &NormOptions::default())
}

pub fn exact_norm_with(
    m: &Molecule,
    ground: &GroundSet,
    p: f64,
    opts: &NormOptions,
) -> Result<NormResult> {
    let view = check_inputs(m, ground, p)?;
    let n = ground.len();
    if n > opts.cap {
        let (lower, upper) = bounds_only(m, ground, p)?;
        return Ok(NormResult { value: upper, p, exact: false, lower_bound: lower, witness_tree: vec![] });
    }
    if m.is_zero() || n == 1 {
        return Ok(NormResult { value: 0.0, p, exact: true, lower_bound: 0.0, witness_tree: vec![] });
    }
    let table = FlowTable::new(&view);
    let (cost_p, cost_1, edges) = match opts.method {
        NormMethod::PruferEnumeration => prufer::minimize(&table, p),
        NormMethod::SubsetDp => {
            let (cp, edges) = dp::minimize(&table, p);
            let (c1, _) = dp::minimize(&table, 1.0);
            (cp, c1, edges)
        }
    };
    let witness_tree = edges
        .into_iter()
        .map(|(i, j)| (ground.points()[i].clone(), ground.points()[j].clone()))
        .collect();
    Ok(NormResult { value: cost_p.powf(1.0 / p), p, exact: true, lower_bound: cost_1, witness_tree })
}

/// Star-representation upper bound and a pairing lower bound, without enumeration.
fn bounds_only(m: &Molecule, ground: &GroundSet, p: f64) -> Result<(f64, f64)> {
    let base = m.base();
    let metric = ground.metric();
    let mut star = 0.0;
    for (x, a) in m.terms() {
        star += (rational_to_f64(a).abs() * metric.distance(x, base)?.to_f64()).powf(p);
    }
    let upper = star.powf(1.0 / p);
    let lower = if m.dim() == 1 {
        line_f1_norm(m)?
    } else {
        pairing_lower_bound(m, metric)?
    };
    Ok((lower.min(upper), upper))
}

/// Best of the 1-Lipschitz test functions `d(., base)` and `x_j - base_j`.
fn pairing_lower_bound(m: &Molecule, metric: Metric) -> Result<f64> {
    let base = m.base();
    let mut best = Rational::zero();
    let mut radial = Rational::zero();
    for (x, a) in m.terms() {
        radial += a * metric.distance(x, base)?.to_rational();
    }
    best = best.max(radial.abs());
    for j in 0..m.dim() {
        let mut s = Rational::zero();
        for (x, a) in m.terms() {
            s += a * (&x.coords()[j] - &base.coords()[j]).to_rational();
        }
        best = best.max(s.abs());
    }
    Ok(rational_to_f64(&best))
}

/// `lower` = the `p = 1` value and `upper` = the p-norm, both over `supp(m) + base`.
///
/// Every 1-Lipschitz function on a finite subset extends to `R^d`, so the `p = 1` value is a
/// lower bound for the norm in the free p-space over `R^d`; representations inside the support
/// are a subset of all representations, so the intrinsic p-norm is an upper bound.
pub fn norm_sandwich(m: &Molecule, p: f64) -> Result<Sandwich> {
    norm_sandwich_with(m, p, &NormOptions::default())
}

pub fn norm_sandwich_with(m: &Molecule, p: f64, opts: &NormOptions) -> Result<Sandwich> {
    let ground = GroundSet::from_support(m);
    let r = exact_norm_with(m, &ground, p, opts)?;
    Ok(Sandwich { lower: r.lower_bound, upper: r.value, exact: r.exact })
}

/// The unique flow on a spanning tree with the given node divergences.
///
/// Flows are reported per input edge, oriented towards `base`: a value `b` on edge `(u, v)`
/// stands for `b (delta(far) - delta(near))`, where `far` is the endpoint separated from the
/// base by the edge. The base absorbs whatever balances the other divergences.
pub fn tree_flow(
    n: usize,
    base: usize,
    edges: &[(usize, usize)],
    divergence: &BTreeMap<usize, Rational>,
) -> Result<Vec<Rational>> {
    if base >= n || edges.len() + 1 != n || edges.iter().any(|&(u, v)| u >= n || v >= n || u == v) {
        return Err(Error::Precondition("edge list is not a spanning tree".into()));
    }
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    for (k, &(u, v)) in edges.iter().enumerate() {
        adj[u].push(k);
        adj[v].push(k);
    }
    let mut acc: Vec<Rational> = (0..n)
        .map(|i| if i == base { Rational::zero() } else { divergence.get(&i).cloned().unwrap_or_default() })
        .collect();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut used = vec![false; edges.len()];
    let mut flows = vec![Rational::zero(); edges.len()];
    let mut stack: Vec<usize> = (0..n).filter(|&i| i != base && degree[i] == 1).collect();
    let mut assigned = 0;
    while let Some(leaf) = stack.pop() {
        let Some(&k) = adj[leaf].iter().find(|&&k| !used[k]) else { continue };
        used[k] = true;
        assigned += 1;
        let (u, v) = edges[k];
        let parent = if u == leaf { v } else { u };
        flows[k] = acc[leaf].clone();
        let moved = std::mem::take(&mut acc[leaf]);
        acc[parent] += moved;
        degree[leaf] -= 1;
        degree[parent] -= 1;
        if parent != base && degree[parent] == 1 {
            stack.push(parent);
        }
    }
    if assigned != edges.len() {
        return Err(Error::Precondition("edge list is not a spanning tree".into()));
    }
    Ok(flows)
}

/// `sum_j |b_j|^p d(x_j, y_j)^p` for a representation `sum_j b_j (delta(x_j) - delta(y_j))`.
pub fn representation_cost(terms: &[(Point, Point, f64)], p: f64, metric: Metric) -> Result<f64> {
    let mut total = 0.0;
    for (x, y, b) in terms {
        total += (b.abs() * metric.distance(x, y)?.to_f64()).powf(p);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use crate::molecule::SpaceDescriptor;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }
    fn line_mol(terms: &[(i64, i64)]) -> Molecule {
        Molecule::canonicalize(
            terms.iter().map(|&(x, a)| (Point::from_ints(&[x]), q(a))),
            SpaceDescriptor::full(1),
        )
        .unwrap()
    }
    fn ground(xs: &[i64]) -> GroundSet {
        GroundSet::new(xs.iter().map(|&x| Point::from_ints(&[x])), Point::from_ints(&[0]), Metric::Sup)
            .unwrap()
    }

    #[test]
    fn single_point_mass_is_its_distance() {
        let m = line_mol(&[(3, 1)]);
        for p in [1.0, 0.5, 0.3] {
            let r = exact_norm(&m, &GroundSet::from_support(&m), p).unwrap();
            assert!((r.value - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn worked_three_point_values() {
        // Trees on {0,1,2}: paths 0-1-2 (cost 3), 1-0-2 (cost 3), 0-2-1 (cost 5) at p = 1.
        let m = line_mol(&[(1, 1), (2, 1)]);
        let s = ground(&[0, 1, 2]);
        let r1 = exact_norm(&m, &s, 1.0).unwrap();
        assert!((r1.value - 3.0).abs() < 1e-12);
        let rh = exact_norm(&m, &s, 0.5).unwrap();
        assert!((rh.value - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((rh.lower_bound - 3.0).abs() < 1e-12);
        let dp = exact_norm_with(&m, &s, 0.5, &NormOptions::dp(9)).unwrap();
        assert!((dp.value - rh.value).abs() < 1e-12);
    }

    #[test]
    fn sandwich() {
        let m = line_mol(&[(1, 1), (2, 1)]);
        let s = norm_sandwich(&m, 0.5).unwrap();
        assert!((s.lower - 3.0).abs() < 1e-12);
        assert!((s.upper - 5.828_427_124_746_19).abs() < 1e-12);
        let s1 = norm_sandwich(&m, 1.0).unwrap();
        assert_eq!(s1.lower, s1.upper);
    }

    #[test]
    fn tree_flow_examples() {
        let mut div = BTreeMap::new();
        div.insert(1, q(1));
        div.insert(2, q(1));
        let flows = tree_flow(3, 0, &[(1, 2), (0, 1)], &div).unwrap();
        assert_eq!(flows, vec![q(1), q(2)]);
        let star = tree_flow(3, 0, &[(0, 1), (0, 2)], &div).unwrap();
        assert_eq!(star, vec![q(1), q(1)]);
        let zero = tree_flow(3, 0, &[(0, 1), (0, 2)], &BTreeMap::new()).unwrap();
        assert!(zero.iter().all(Zero::is_zero));
        assert!(tree_flow(3, 0, &[(0, 1)], &div).is_err());
        assert!(tree_flow(4, 0, &[(0, 1), (0, 1), (2, 3)], &div).is_err());
    }

    #[test]
    fn cap_gives_bounds_only() {
        let m = line_mol(&[(1, 1), (2, -1), (3, 1)]);
        let opts = NormOptions { cap: 2, ..Default::default() };
        let r = exact_norm_with(&m, &GroundSet::from_support(&m), 0.5, &opts).unwrap();
        assert!(!r.exact);
        let exact = exact_norm(&m, &GroundSet::from_support(&m), 0.5).unwrap();
        assert!(r.lower_bound <= exact.value + 1e-12);
        assert!(exact.value <= r.value + 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = line_mol(&[(5, 1)]);
        assert!(exact_norm(&m, &ground(&[0, 1]), 1.0).is_err());
        assert!(exact_norm(&m, &GroundSet::from_support(&m), 0.0).is_err());
        assert!(exact_norm(&m, &GroundSet::from_support(&m), 1.5).is_err());
    }
}
