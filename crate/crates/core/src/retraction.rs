//! Lipschitz probes of the lattice retraction `r(x) = sum_v Lambda_R(v, x) delta(v)` on finite
//! unions of grid cubes.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{cube_vertex_factor, retraction_constant, retraction_constant_pth, retraction_envelope};
use crate::error::{Error, Result};
use crate::grid::{lattice_box, Cube, GridSpec, Point};
use crate::interpolation::lambda_weights;
use crate::molecule::{Molecule, SpaceDescriptor};
use crate::pnorm::check_p;
use crate::pnorm::dp::DpSolver;

/// Cubes `R w + [0, R]^d` for the listed `w`, with vertex set `V` and a base vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Patch {
    grid: GridSpec,
    cubes: Vec<Cube>,
    vertices: BTreeSet<Point>,
    base: Point,
}

impl Patch {
    pub fn new(grid: GridSpec, indices: Vec<Vec<i64>>, base: Point) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Precondition("a patch needs at least one cube".into()));
        }
        let mut cubes = Vec::new();
        let mut vertices = BTreeSet::new();
        for w in indices {
            let cube = Cube::new(&grid, w)?;
            vertices.extend(cube.vertices());
            cubes.push(cube);
        }
        cubes.sort();
        cubes.dedup();
        if !vertices.contains(&base) {
            return Err(Error::Precondition(format!("base {base} is not a vertex of the patch")));
        }
        Ok(Patch { grid, cubes, vertices, base })
    }

    /// Four unit cubes: a row `[0,4]` for `d = 1`, the block `[0,2]^2` for `d = 2`, each with
    /// base at the origin.
    pub fn standard(d: usize) -> Result<Self> {
        let indices = match d {
            1 => vec![vec![0], vec![1], vec![2], vec![3]],
            2 => vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]],
            _ => return Err(Error::Precondition(format!("no standard patch in dimension {d}"))),
        };
        Patch::new(GridSpec::dyadic(d, 0), indices, Point::origin(d))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn vertices(&self) -> &BTreeSet<Point> {
        &self.vertices
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// The finite pointed space `V`.
    pub fn space(&self) -> SpaceDescriptor {
        SpaceDescriptor::finite(self.vertices.iter().cloned(), self.base.clone())
            .expect("patch vertices share a dimension")
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim() && self.cubes.iter().any(|c| c.contains(x))
    }

    /// All points of `K` on the absolute mesh `2^-level`, sorted.
    pub fn sample_points(&self, level: u32) -> Result<Vec<Point>> {
        let ratio = GridSpec::dyadic(self.dim(), level as i64)
            .refinement_ratio(&self.grid)
            .ok_or_else(|| Error::Precondition(format!("mesh 2^-{level} is coarser than the patch grid")))?;
        let mut pts = BTreeSet::new();
        let steps = ratio as i64;
        for cube in &self.cubes {
            let lo: Vec<i64> = cube.index.iter().map(|w| w * steps).collect();
            for offset in lattice_box(self.dim(), 0, 0, steps) {
                let w: Vec<i64> = offset
                    .coords()
                    .iter()
                    .zip(&lo)
                    .map(|(o, l)| l + o.to_i64().expect("small offset"))
                    .collect();
                pts.insert(Point::from_scaled(&w, level));
            }
        }
        Ok(pts.into_iter().collect())
    }
}

/// `r(x)` as a molecule over `V`.
pub fn retraction_image(x: &Point, patch: &Patch) -> Result<Molecule> {
    if !patch.contains(x) {
        return Err(Error::OutsideSpace { point: x.to_string(), space: "the patch".into() });
    }
    let weights = lambda_weights(x, &patch.grid)?;
    Molecule::canonicalize(
        weights.into_entries().into_iter().map(|(v, w)| (v, w.to_rational())),
        patch.space(),
    )
}

#[derive(Clone, PartialEq, Debug)]
pub struct ProbeConfig {
    pub p: f64,
    /// Sample points on the absolute mesh `2^-mesh_level`.
    pub mesh_level: u32,
    /// Evaluate every pair when there are at most this many; otherwise sample.
    pub max_pairs: usize,
    /// Number of random pairs when sampling.
    pub samples: usize,
    pub seed: u64,
    /// Largest `|V|` accepted.
    pub cap: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { p: 1.0, mesh_level: 4, max_pairs: 1_000_000, samples: 20_000, seed: 0, cap: 16 }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ProbeReport {
    pub p: f64,
    pub d: usize,
    /// Number of pairs evaluated.
    pub samples: usize,
    pub exhaustive: bool,
    /// `max ||r(x) - r(y)|| / |x - y|_inf`.
    pub measured_max: f64,
    pub argmax_pair: (Point, Point),
    /// `d 2^((1-p)/p) (1 + 2d(2^d - 1))^(1/p)`.
    pub envelope: f64,
    /// `(1 + 2d(2^d - 1))^(1/p)`.
    pub nominal_constant: f64,
    /// `max ||r(x) - r(y)|| / |x - y|_1`.
    pub measured_l1_max: f64,
    /// `max ||r(x) - r(y)||^p / |x - y|_inf`, read against `1 + 2d(2^d - 1)`.
    pub chain_ratio_max: f64,
    pub chain_bound: f64,
    /// Pairs sharing a cube.
    pub within_cube_pairs: usize,
    /// `max ||r(x) - r(y)||^p - (2^d - 1) |x - y|_1^p` over pairs sharing a cube.
    pub within_cube_max_excess: f64,
}

impl ProbeReport {
    pub fn within_envelope(&self) -> bool {
        self.measured_max <= self.envelope
    }
}

struct Sample {
    weights: Vec<f64>,
    cubes: Vec<usize>,
    coords: Vec<f64>,
}

/// Measures the Lipschitz ratio of `r` over pairs of sample points of the patch.
///
/// Norms are exact over `V`. Weights have small dyadic denominators, so the flows are exact
/// in `f64`.
pub fn lipschitz_probe(patch: &Patch, cfg: &ProbeConfig) -> Result<ProbeReport> {
    check_p(cfg.p)?;
    let p = cfg.p;
    let d = patch.dim();
    let verts: Vec<Point> = {
        let mut v: Vec<Point> = patch.vertices.iter().filter(|v| **v != patch.base).cloned().collect();
        v.push(patch.base.clone());
        v
    };
    let n = verts.len();
    if n > cfg.cap {
        return Err(Error::CapExceeded { size: n, cap: cfg.cap });
    }
    if n < 2 {
        return Err(Error::Precondition("patch has a single vertex".into()));
    }
    let mut dist_p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let dij = crate::grid::sup_dist(&verts[i], &verts[j])?.to_f64();
            dist_p[i * n + j] = dij.powf(p);
        }
    }
    let points = patch.sample_points(cfg.mesh_level)?;
    let samples: Vec<Sample> = points
        .iter()
        .map(|x| {
            let mut weights = vec![0.0; n];
            for (v, w) in lambda_weights(x, &patch.grid)?.into_entries() {
                let i = verts.iter().position(|u| *u == v).expect("weights live on patch vertices");
                weights[i] = w.to_f64();
            }
            let cubes = patch.cubes.iter().enumerate().filter(|(_, c)| c.contains(x)).map(|(k, _)| k).collect();
            Ok(Sample { weights, cubes, coords: x.to_f64() })
        })
        .collect::<Result<_>>()?;
    let count = samples.len();
    let total_pairs = count * count.saturating_sub(1) / 2;
    let exhaustive = total_pairs <= cfg.max_pairs;
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..count).flat_map(|i| (i + 1..count).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        sample(&mut rng, total_pairs, cfg.samples.min(total_pairs))
            .into_iter()
            .map(|k| unrank_pair(k, count))
            .collect()
    };

    let mut solver = DpSolver::new(n);
    let half = 1usize << (n - 1);
    let mut sums = vec![0.0; half];
    let mut mass = vec![0.0; half];
    let mut div = vec![0.0; n];
    let vertex_factor = cube_vertex_factor(d);
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut l1_max = 0.0f64;
    let mut chain_max = 0.0f64;
    let mut within_pairs = 0usize;
    let mut within_excess = f64::NEG_INFINITY;
    for &(i, j) in &pairs {
        let (a, b) = (&samples[i], &samples[j]);
        for k in 0..n {
            div[k] = a.weights[k] - b.weights[k];
        }
        for mask in 1..half {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + div[low];
            mass[mask] = if p == 1.0 { sums[mask].abs() } else { sums[mask].abs().powf(p) };
        }
        let cost = solver.solve(&mass, &dist_p);
        let norm = cost.powf(1.0 / p);
        let (sup, l1) = a.coords.iter().zip(&b.coords).fold((0.0f64, 0.0f64), |(s, l), (u, v)| {
            let g = (u - v).abs();
            (s.max(g), l + g)
        });
        let ratio = norm / sup;
        if ratio > best.0 {
            best = (ratio, i, j);
        }
        l1_max = l1_max.max(norm / l1);
        chain_max = chain_max.max(cost / sup);
        if a.cubes.iter().any(|c| b.cubes.contains(c)) {
            within_pairs += 1;
            within_excess = within_excess.max(cost - vertex_factor * l1.powf(p));
        }
    }
    if pairs.is_empty() {
        return Err(Error::Precondition("no sample pairs".into()));
    }
    Ok(ProbeReport {
        p,
        d,
        samples: pairs.len(),
        exhaustive,
        measured_max: best.0,
        argmax_pair: (points[best.1].clone(), points[best.2].clone()),
        envelope: retraction_envelope(p, d),
        nominal_constant: retraction_constant(p, d),
        measured_l1_max: l1_max,
        chain_ratio_max: chain_max,
        chain_bound: retraction_constant_pth(d),
        within_cube_pairs: within_pairs,
        within_cube_max_excess: if within_pairs > 0 { within_excess } else { 0.0 },
    })
}

/// The `k`-th pair `(i, j)`, `i < j`, in row-major order over `count` items.
fn unrank_pair(mut k: usize, count: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = count - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// `r(v) = delta(v)` for every vertex of the patch.
pub fn fixes_vertices(patch: &Patch) -> Result<bool> {
    let space = patch.space();
    for v in &patch.vertices {
        if retraction_image(v, patch)? != Molecule::delta(space.clone(), v.clone())? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pnorm::{exact_norm_with, GroundSet, Metric, NormOptions};
    use crate::Rational;
    use num_bigint::BigInt;

    fn p(c: &[&str]) -> Point {
        Point::parse(c).unwrap()
    }

    #[test]
    fn images() {
        let patch = Patch::new(GridSpec::dyadic(1, 0), vec![vec![0]], p(&["0"])).unwrap();
        let m = retraction_image(&p(&["1/2"]), &patch).unwrap();
        assert_eq!(m.coeff(&p(&["1"])), Rational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(m.len(), 1);
        assert!(retraction_image(&p(&["0"]), &patch).unwrap().is_zero());
        assert!(retraction_image(&p(&["2"]), &patch).is_err());
        assert!(fixes_vertices(&Patch::standard(2).unwrap()).unwrap());
    }

    #[test]
    fn unrank_covers_pairs() {
        let all: Vec<_> = (0..10).map(|k| unrank_pair(k, 5)).collect();
        let direct: Vec<_> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        assert_eq!(all, direct);
    }

    #[test]
    fn probe_agrees_with_exact_norm() {
        let patch = Patch::standard(1).unwrap();
        let cfg = ProbeConfig { p: 0.5, mesh_level: 1, ..Default::default() };
        let report = lipschitz_probe(&patch, &cfg).unwrap();
        let (x, y) = &report.argmax_pair;
        let m = retraction_image(x, &patch).unwrap().sub(&retraction_image(y, &patch).unwrap()).unwrap();
        let ground = GroundSet::from_space(&m).unwrap().with_metric(Metric::Sup);
        let exact = exact_norm_with(&m, &ground, 0.5, &NormOptions::default()).unwrap();
        let sup = crate::grid::sup_dist(x, y).unwrap().to_f64();
        assert!((exact.value / sup - report.measured_max).abs() < 1e-12);
        assert!(report.within_envelope());
        assert_eq!(report.samples, 36);
    }
}
