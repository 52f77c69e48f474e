//! The Schauder basis of the free p-space over `R^d`.
//!
//! Given increasing cutoffs `(k_n)_{n >= -1}`, level `n` uses the windows
//! `V_n = {||x|| <= k_n} ∩ 2^-n Z^d` and `W_n = {||x|| <= k_{n-1}} ∩ 2^-n Z^d`, with
//! `V_{-1} = {0}`. Points of `W_n \ V_{n-1}` refine the inner window and carry the same
//! vectors as the cube basis; points of `V_n \ W_n` sit on outer shells and carry
//! `delta(x) - delta(s_n(x))`, where the shell map `s_n` moves `x` one mesh step inwards.
//!
//! Vectors are ordered by `eta(x) = (n, ||x|| - k_{n-1})` for shell points and `(n, 0)` for
//! inner points, then lexicographically by point.
//!
//! The projections behind the expansion form the ladder `P_{2n} = P_{k_n, 2^-n}` and
//! `P_{2n-1} = P_{k_{n-1}, 2^-n}`, starting from `P_{-2} = 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::dyadic::{Dyadic, Rational};
use crate::error::{Error, Result};
use crate::grid::{lattice_box, GridSpec, Point};
use crate::interpolation::lambda_weights;
use crate::molecule::{clamp_point, Molecule, SpaceDescriptor};

/// The cutoffs `k_{-1} < k_0 < k_1 < ...`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CutoffSequence {
    /// `k_n = n + offset`.
    Linear { offset: i64 },
    /// `k_{-1}, k_0, ...` listed explicitly; later levels are undefined.
    Explicit(Vec<i64>),
}

impl Default for CutoffSequence {
    fn default() -> Self {
        CutoffSequence::Linear { offset: 2 }
    }
}

impl CutoffSequence {
    pub fn linear(offset: i64) -> Result<Self> {
        if offset < 2 {
            return Err(Error::Parse(format!("linear:+{offset} gives k_-1 < 1")));
        }
        Ok(CutoffSequence::Linear { offset })
    }

    pub fn explicit(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("empty cutoff list".into()));
        }
        if values[0] < 1 {
            return Err(Error::Parse(format!("cutoffs must be positive, got {}", values[0])));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("cutoffs must be strictly increasing".into()));
        }
        Ok(CutoffSequence::Explicit(values))
    }

    /// `k_n` for `n >= -1`.
    pub fn get(&self, n: i64) -> Result<i64> {
        if n < -1 {
            return Err(Error::InvalidIndex(format!("cutoff index {n} is below -1")));
        }
        match self {
            CutoffSequence::Linear { offset } => Ok(n + offset),
            CutoffSequence::Explicit(v) => v.get((n + 1) as usize).copied().ok_or_else(|| {
                Error::Precondition(format!("cutoff k_{n} is not defined by a list of {}", v.len()))
            }),
        }
    }

    /// Largest level whose cutoff is defined.
    pub fn max_level(&self) -> Option<u32> {
        match self {
            CutoffSequence::Linear { .. } => None,
            CutoffSequence::Explicit(v) => (v.len() >= 2).then(|| v.len() as u32 - 2),
        }
    }

    fn dyadic(&self, n: i64) -> Result<Dyadic> {
        Ok(Dyadic::from_int(self.get(n)?))
    }
}

impl FromStr for CutoffSequence {
    type Err = Error;

    /// `linear:+c` or a comma-separated list `k_-1,k_0,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("linear:") {
            let offset = rest
                .trim_start_matches('+')
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("bad cutoff rule {s:?}: {e}")))?;
            return CutoffSequence::linear(offset);
        }
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("bad cutoff list {s:?}: {e}")))?;
        CutoffSequence::explicit(values)
    }
}

impl fmt::Display for CutoffSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutoffSequence::Linear { offset } => write!(f, "linear:+{offset}"),
            CutoffSequence::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RdKind {
    /// `x` in `W_n \ V_{n-1}`.
    InnerRefine,
    /// `x` in `V_n \ W_n`.
    OuterShell,
}

/// A basis index. Ordering is the arrangement order: level, shell offset, point.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RdBasisIndex {
    level: u32,
    shell: Dyadic,
    point: Point,
    kind: RdKind,
}

impl RdBasisIndex {
    /// Classifies `point` at `level`; fails unless it lies in `V_n \ V_{n-1}`.
    pub fn new(level: u32, point: Point, k: &CutoffSequence) -> Result<Self> {
        let n = level as i64;
        let norm = point.sup_norm();
        let inner_cut = k.dyadic(n - 1)?;
        let on_level = GridSpec::dyadic(point.dim(), n).lattice_coords(&point)?.is_some();
        if !on_level || norm > k.dyadic(n)? {
            return Err(Error::InvalidIndex(format!("{point} is not in V_{n}")));
        }
        let in_previous = if n == 0 {
            point.is_origin()
        } else {
            norm <= inner_cut && GridSpec::dyadic(point.dim(), n - 1).lattice_coords(&point)?.is_some()
        };
        if in_previous {
            return Err(Error::InvalidIndex(format!("{point} already lies in V_{}", n - 1)));
        }
        let (kind, shell) = if norm <= inner_cut {
            (RdKind::InnerRefine, Dyadic::zero())
        } else {
            (RdKind::OuterShell, &norm - &inner_cut)
        };
        Ok(RdBasisIndex { level, shell, point, kind })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn kind(&self) -> RdKind {
        self.kind
    }

    /// `eta(x)`.
    pub fn eta(&self) -> (u32, Dyadic) {
        (self.level, self.shell.clone())
    }
}

/// `V_n` for `n >= -1`, in lexicographic order.
pub fn v_set(n: i64, d: usize, k: &CutoffSequence) -> Result<Vec<Point>> {
    if n == -1 {
        return Ok(vec![Point::origin(d)]);
    }
    window(n, k.get(n)?, d)
}

/// `W_n` for `n >= 0`, in lexicographic order.
pub fn w_set(n: i64, d: usize, k: &CutoffSequence) -> Result<Vec<Point>> {
    if n < 0 {
        return Err(Error::InvalidIndex(format!("W_{n} is not defined")));
    }
    window(n, k.get(n - 1)?, d)
}

fn window(n: i64, cut: i64, d: usize) -> Result<Vec<Point>> {
    if n < 0 {
        return Err(Error::InvalidIndex(format!("level {n} is negative")));
    }
    let reach = cut << n;
    Ok(lattice_box(d, n as u32, -reach, reach))
}

/// `s_n(x)_i = sgn(x_i) min(||x|| - 2^-n, |x_i|)`, without validating `x`.
pub fn shell_formula(x: &Point, level: u32) -> Point {
    let cap = &x.sup_norm() - &Dyadic::pow2(-(level as i64));
    x.map(|c| {
        let a = c.abs().min(cap.clone());
        if c.signum() < 0 {
            -a
        } else {
            a
        }
    })
}

/// `s_n(x)` for `x` in `V_n \ W_n`.
pub fn shell_map(x: &Point, n: u32, k: &CutoffSequence) -> Result<Point> {
    match RdBasisIndex::new(n, x.clone(), k) {
        Ok(idx) if idx.kind == RdKind::OuterShell => Ok(shell_formula(x, n)),
        _ => Err(Error::InvalidIndex(format!("{x} is not in V_{n} \\ W_{n}"))),
    }
}

fn one() -> Rational {
    Rational::one()
}

/// `f(x)` as a molecule over `R^d`.
pub fn basis_vector_rd(idx: &RdBasisIndex, k: &CutoffSequence) -> Result<Molecule> {
    let idx = RdBasisIndex::new(idx.level, idx.point.clone(), k)?;
    basis_vector_unchecked(&idx)
}

fn basis_vector_unchecked(idx: &RdBasisIndex) -> Result<Molecule> {
    let d = idx.point.dim();
    let space = SpaceDescriptor::full(d);
    let mut terms = vec![(idx.point.clone(), one())];
    match idx.kind {
        RdKind::OuterShell => terms.push((shell_formula(&idx.point, idx.level), -one())),
        RdKind::InnerRefine if idx.level > 0 => {
            let coarse = GridSpec::dyadic(d, idx.level as i64 - 1);
            for (v, w) in lambda_weights(&idx.point, &coarse)?.into_entries() {
                terms.push((v, -w.to_rational()));
            }
        }
        RdKind::InnerRefine => {}
    }
    Molecule::canonicalize(terms, space)
}

/// Indices of level `n` in arrangement order.
pub fn level_indices(n: u32, d: usize, k: &CutoffSequence) -> Result<Vec<RdBasisIndex>> {
    let mut out: Vec<RdBasisIndex> = v_set(n as i64, d, k)?
        .into_iter()
        .filter_map(|x| RdBasisIndex::new(n, x, k).ok())
        .collect();
    out.sort();
    Ok(out)
}

/// All indices of level at most `depth`, in arrangement order.
pub fn arrangement_rd(depth: u32, d: usize, k: &CutoffSequence) -> Result<Vec<RdBasisIndex>> {
    let mut out = Vec::new();
    for n in 0..=depth {
        out.extend(level_indices(n, d, k)?);
    }
    Ok(out)
}

/// `P_j m` for `j >= -2`.
pub fn projection_ladder(j: i64, m: &Molecule, k: &CutoffSequence) -> Result<Molecule> {
    if j < -2 {
        return Err(Error::InvalidIndex(format!("ladder index {j} is below -2")));
    }
    if j == -2 {
        return Ok(Molecule::zero(m.space().clone()));
    }
    let (t, n) = if j % 2 == 0 {
        (k.dyadic(j / 2)?, j / 2)
    } else {
        let n = (j + 1) / 2;
        (k.dyadic(n - 1)?, n)
    };
    m.project(&t, &GridSpec::dyadic(m.dim(), n))
}

/// Nonzero coefficients in arrangement order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RdBasisCoefficients {
    dim: usize,
    entries: Vec<(RdBasisIndex, Rational)>,
}

impl RdBasisCoefficients {
    /// Sorts entries, merges repeats and drops zeros.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (RdBasisIndex, Rational)>) -> Result<Self> {
        let mut acc: BTreeMap<RdBasisIndex, Rational> = BTreeMap::new();
        for (idx, c) in entries {
            if idx.point.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: idx.point.dim() });
            }
            *acc.entry(idx).or_insert_with(Rational::zero) += c;
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(RdBasisCoefficients { dim, entries: acc.into_iter().collect() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(RdBasisIndex, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &RdBasisIndex) -> Rational {
        self.entries
            .binary_search_by(|(i, _)| i.cmp(idx))
            .map(|k| self.entries[k].1.clone())
            .unwrap_or_default()
    }

    /// Entries strictly before `arrangement[j]`.
    pub fn prefix(&self, arrangement: &[RdBasisIndex], j: usize) -> Self {
        let entries = match arrangement.get(j) {
            Some(stop) => self.entries.iter().filter(|(i, _)| i < stop).cloned().collect(),
            None => self.entries.clone(),
        };
        RdBasisCoefficients { dim: self.dim, entries }
    }

    /// Entries selected by `keep`.
    pub fn filter(&self, keep: impl Fn(&RdBasisIndex) -> bool) -> Self {
        let entries = self.entries.iter().filter(|(i, _)| keep(i)).cloned().collect();
        RdBasisCoefficients { dim: self.dim, entries }
    }
}

fn check_support(m: &Molecule, depth: u32, k: &CutoffSequence) -> Result<()> {
    if m.space() != &SpaceDescriptor::full(m.dim()) {
        return Err(Error::SpaceMismatch(format!("expected R^{}, got {}", m.dim(), m.space())));
    }
    let grid = GridSpec::dyadic(m.dim(), depth as i64);
    let cut = k.dyadic(depth as i64)?;
    for x in m.support() {
        if grid.lattice_coords(x)?.is_none() || x.sup_norm() > cut {
            return Err(Error::Precondition(format!("{x} is not in V_{depth}")));
        }
    }
    Ok(())
}

/// Coefficients of a molecule supported on `V_depth`.
///
/// Level `n` contributes two blocks. The inner block `P_{2n-1} m - P_{2n-2} m` is read off
/// the coefficients of `P_{2n-1} m` on `W_n \ V_{n-1}`. The shell block
/// `h = P_{2n} m - P_{2n-1} m` is peeled from the outermost shell inwards: each point `x`
/// of the current shell gets coefficient `h(x)`, which then moves to `s_n(x)`.
pub fn expand_rd(m: &Molecule, depth: u32, k: &CutoffSequence) -> Result<RdBasisCoefficients> {
    check_support(m, depth, k)?;
    let d = m.dim();
    let mut entries = Vec::new();
    for n in 0..=depth {
        let odd = projection_ladder(2 * n as i64 - 1, m, k)?;
        let even = projection_ladder(2 * n as i64, m, k)?;
        for (x, c) in odd.terms() {
            if let Ok(idx) = RdBasisIndex::new(n, x.clone(), k) {
                if idx.kind == RdKind::InnerRefine {
                    entries.push((idx, c.clone()));
                }
            }
        }
        let mut h: BTreeMap<Point, Rational> = even.sub(&odd)?.terms().clone();
        let step = Dyadic::pow2(-(n as i64));
        let inner = k.dyadic(n as i64 - 1)?;
        let mut t = k.dyadic(n as i64)?;
        while t > inner {
            let shell: Vec<Point> = h.keys().filter(|x| x.sup_norm() == t).cloned().collect();
            for x in shell {
                let c = h.remove(&x).expect("shell point present");
                let y = shell_formula(&x, n);
                if !y.is_origin() {
                    let e = h.entry(y.clone()).or_insert_with(Rational::zero);
                    *e += &c;
                    if e.is_zero() {
                        h.remove(&y);
                    }
                }
                let idx = RdBasisIndex::new(n, x, k)?;
                if idx.kind != RdKind::OuterShell {
                    return Err(Error::Internal(format!("peeled non-shell point {}", idx.point)));
                }
                entries.push((idx, c));
            }
            t = &t - &step;
        }
        if let Some((x, c)) = h.iter().next() {
            return Err(Error::Internal(format!("nonzero peeling residue {c} at {x} on level {n}")));
        }
    }
    RdBasisCoefficients::new(d, entries)
}

/// `sum c f(x)` over the entries.
pub fn reconstruct_rd(coeffs: &RdBasisCoefficients) -> Result<Molecule> {
    let space = SpaceDescriptor::full(coeffs.dim);
    let mut terms: Vec<(Point, Rational)> = Vec::new();
    for (idx, c) in &coeffs.entries {
        for (x, a) in basis_vector_unchecked(idx)?.terms() {
            terms.push((x.clone(), a * c));
        }
    }
    Molecule::canonicalize(terms, space)
}

/// The `j`-th partial sum of the expansion of `m` along `arrangement`.
pub fn partial_sum_rd(
    m: &Molecule,
    depth: u32,
    k: &CutoffSequence,
    arrangement: &[RdBasisIndex],
    j: usize,
) -> Result<Molecule> {
    reconstruct_rd(&expand_rd(m, depth, k)?.prefix(arrangement, j))
}

/// `r_t(x) = r_t(s_n(x))` with `t = k_{n-1}`, for a shell point `x` of level `n`.
pub fn clamp_compatible(x: &Point, n: u32, k: &CutoffSequence) -> Result<bool> {
    let t = k.dyadic(n as i64 - 1)?;
    let y = shell_map(x, n, k)?;
    Ok(clamp_point(x, &t) == clamp_point(&y, &t))
}
