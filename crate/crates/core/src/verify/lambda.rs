//! Exhaustive and sampled checks of the partition of unity.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;

use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::grid::{cubes_containing, l1_dist, lattice_box, GridSpec, Point};
use crate::interpolation::{lambda, lambda_via_cube, lambda_weights, WeightMap};

/// Violation counts over a window of `3^d` cells; every count should be zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LambdaWindowStats {
    pub points: usize,
    pub boundary_points: usize,
    pub lipschitz_pairs: usize,
    pub refinement_checks: usize,
    /// Weights not summing to 1.
    pub partition: usize,
    /// Nonzero `Lambda(v, x)` at a vertex of no containing cube, or a pointwise value
    /// disagreeing with the sparse weight map.
    pub support: usize,
    /// Lattice points whose weights are not `delta_{u,v}`.
    pub kronecker: usize,
    /// `|Lambda(v,x) - Lambda(v,y)| > |x - y|_1 / R` for `x, y` in a common cube.
    pub lipschitz: usize,
    /// Coarse weights differing from the refined composition.
    pub refinement: usize,
    /// Disagreement between containing cubes.
    pub well_defined: usize,
}

impl LambdaWindowStats {
    pub fn violations(&self) -> usize {
        self.partition + self.support + self.kronecker + self.lipschitz + self.refinement + self.well_defined
    }
}

/// Weights keyed by integer lattice coordinates; `None` if some vertex is off the lattice.
type IntWeights = Vec<(Vec<i64>, Dyadic)>;

fn int_weights(w: WeightMap, grid: &GridSpec) -> Option<IntWeights> {
    w.into_entries()
        .into_iter()
        .map(|(v, a)| grid.lattice_coords(&v).ok().flatten().map(|u| (u, a)))
        .collect()
}

fn same(a: &[i64], b: &[i64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y)
}

fn lookup<'a>(w: &'a IntWeights, u: &[i64], zero: &'a Dyadic) -> &'a Dyadic {
    w.iter().find(|(v, _)| same(v, u)).map_or(zero, |(_, a)| a)
}

/// Checks every point of the absolute mesh `2^-sample_level` in `R [-1, 2]^d`, with
/// `R = 2^log2_mesh`, against the grid `R` and the coarser grids `ratio * R`.
pub fn lambda_window(d: usize, log2_mesh: i64, sample_level: u32, ratios: &[u64]) -> Result<LambdaWindowStats> {
    let grid = GridSpec::dyadic(d, -log2_mesh);
    let log2_steps = sample_level as i64 + log2_mesh;
    let steps = 1i64 << log2_steps;
    let coarse: Vec<GridSpec> = ratios
        .iter()
        .map(|r| GridSpec::dyadic(d, -(log2_mesh + r.trailing_zeros() as i64)))
        .collect();
    let (lo, hi) = (-steps, 2 * steps);
    let offsets: Vec<Vec<i64>> = lattice_box(d, 0, -1, 2)
        .iter()
        .map(|o| o.coords().iter().map(|c| c.to_i64().unwrap()).collect())
        .collect();
    // Coarse weights of the fine vertices `R u`, `u` in `{-1, .., 2}^d`, indexed in base 4.
    let mut cache: Vec<Vec<Option<IntWeights>>> = vec![vec![None; 1 << (2 * d)]; coarse.len()];
    let side = (hi - lo + 1) as usize;
    let mut recent = Recent {
        lo,
        side,
        slots: vec![None; (0..d).map(|i| side.pow(i as u32)).sum::<usize>() + 1],
        extra: HashMap::new(),
        box_base: Vec::new(),
        box_verts: Vec::new(),
    };
    let mut s = LambdaWindowStats::default();
    let mut a = vec![lo; d];
    loop {
        window_point(&a, &grid, sample_level, steps, &offsets, &coarse, &mut cache, &mut recent, &mut s)?;
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(s);
            }
            k -= 1;
            if a[k] < hi {
                a[k] += 1;
                break;
            }
            a[k] = lo;
        }
    }
}

/// Weights of recently visited window points and of their partners, addressed by linear
/// index, plus the lattice box around the current cube.
struct Recent {
    lo: i64,
    side: usize,
    slots: Vec<Option<(usize, Rc<IntWeights>)>>,
    extra: HashMap<Vec<i64>, Rc<IntWeights>>,
    box_base: Vec<i64>,
    box_verts: Vec<(Vec<i64>, Point)>,
}

impl Recent {
    fn linear(&self, a: &[i64]) -> usize {
        a.iter().fold(0, |acc, c| acc * self.side + (c - self.lo) as usize)
    }

    fn store(&mut self, a: &[i64], w: &Rc<IntWeights>) {
        let i = self.linear(a);
        let n = self.slots.len();
        self.slots[i % n] = Some((i, w.clone()));
    }

    fn get(&mut self, b: &[i64], grid: &GridSpec, sample_level: u32) -> Result<Option<Rc<IntWeights>>> {
        let i = self.linear(b);
        let n = self.slots.len();
        if let Some((j, w)) = &self.slots[i % n] {
            if *j == i {
                return Ok(Some(w.clone()));
            }
        }
        if let Some(w) = self.extra.get(b) {
            return Ok(Some(w.clone()));
        }
        let w = int_weights(lambda_weights(&Point::from_scaled(b, sample_level), grid)?, grid).map(Rc::new);
        if let Some(w) = &w {
            self.extra.insert(b.to_vec(), w.clone());
        }
        Ok(w)
    }
}

#[allow(clippy::too_many_arguments)]
fn window_point(
    a: &[i64],
    grid: &GridSpec,
    sample_level: u32,
    steps: i64,
    offsets: &[Vec<i64>],
    coarse: &[GridSpec],
    cache: &mut [Vec<Option<IntWeights>>],
    recent: &mut Recent,
    s: &mut LambdaWindowStats,
) -> Result<()> {
    let d = a.len();
    let log2_steps = steps.trailing_zeros() as i64;
    let x = Point::from_scaled(a, sample_level);
    s.points += 1;
    let wx = lambda_weights(&x, grid)?;
    if wx.total() != Dyadic::one() {
        s.partition += 1;
    }
    let Some(wx) = int_weights(wx, grid).map(Rc::new) else {
        s.support += 1;
        return Ok(());
    };
    let cubes = cubes_containing(&x, grid)?;
    let mut verts: Vec<Vec<i64>> = cubes
        .iter()
        .flat_map(|q| (0..1u32 << d).map(move |m| (0..d).map(|i| q.index[i] + (m >> (d - 1 - i) & 1) as i64).collect()))
        .collect();
    verts.sort();
    verts.dedup();
    if wx.iter().any(|(v, _)| verts.binary_search(v).is_err()) {
        s.support += 1;
    }
    // Every lattice vertex within one cell of the containing cubes.
    let zero = Dyadic::zero();
    let base = &cubes[0].index;
    if recent.box_base != *base {
        recent.box_base = base.clone();
        recent.box_verts = offsets
            .iter()
            .map(|offs| {
                let u: Vec<i64> = base.iter().zip(offs).map(|(b, o)| b + o).collect();
                let v = grid.vertex(&u);
                (u, v)
            })
            .collect();
    }
    for (u, v) in &recent.box_verts {
        let val = lambda(v, &x, grid)?;
        if &val != lookup(&wx, u, &zero) || (verts.binary_search(u).is_err() && !val.is_zero()) {
            s.support += 1;
        }
    }
    if let Some(u) = grid.lattice_coords(&x)? {
        if wx.len() != 1 || wx[0].0 != u || wx[0].1 != Dyadic::one() {
            s.kronecker += 1;
        }
    }
    if cubes.len() > 1 {
        s.boundary_points += 1;
    }
    // Box entries are in base-4 order of `u - base + 1`.
    let vert_points: Vec<&Point> = verts
        .iter()
        .map(|u| &recent.box_verts[u.iter().zip(base).fold(0usize, |acc, (c, b)| 4 * acc + (c - b + 1) as usize)].1)
        .collect();
    for q in &cubes {
        for (u, &v) in verts.iter().zip(&vert_points) {
            if &lambda_via_cube(v, &x, q)? != lookup(&wx, u, &zero) {
                s.well_defined += 1;
            }
        }
    }
    // Partners sharing a cube with x, in units of the sample mesh: backward unit steps, the
    // backward diagonal step, the top vertex and the centre of the smallest containing cube.
    recent.store(a, &wx);
    let q = &cubes[0].index;
    let mut partners: Vec<Vec<i64>> = (0..d)
        .map(|i| {
            let mut b = a.to_vec();
            b[i] -= 1;
            b
        })
        .collect();
    partners.push(a.iter().map(|c| c - 1).collect());
    partners.push(q.iter().map(|w| (w + 1) * steps).collect());
    partners.push(q.iter().map(|w| w * steps + steps / 2).collect());
    for b in partners {
        let in_window = b.iter().all(|&c| (-steps..=2 * steps).contains(&c));
        let shared = cubes
            .iter()
            .any(|c| c.index.iter().zip(&b).all(|(w, bi)| (w * steps..=(w + 1) * steps).contains(bi)));
        if b == a || !in_window || !shared {
            continue;
        }
        s.lipschitz_pairs += 1;
        let Some(wy) = recent.get(&b, grid, sample_level)? else {
            s.support += 1;
            continue;
        };
        let l1: i64 = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum();
        let bound = Dyadic::new(l1, log2_steps);
        for (v, _) in wx.iter().chain(wy.iter()) {
            if (lookup(&wx, v, &zero) - lookup(&wy, v, &zero)).abs() > bound {
                s.lipschitz += 1;
            }
        }
    }
    for (g, cache) in coarse.iter().zip(cache.iter_mut()) {
        s.refinement_checks += 1;
        let Some(direct) = int_weights(lambda_weights(&x, g)?, g) else {
            s.refinement += 1;
            continue;
        };
        let mut composed: IntWeights = Vec::new();
        for (u, wu) in wx.iter() {
            let slot = u.iter().fold(0usize, |acc, c| 4 * acc + (c + 1) as usize);
            if cache[slot].is_none() {
                cache[slot] = int_weights(lambda_weights(&grid.vertex(u), g)?, g);
            }
            let Some(coarse_w) = &cache[slot] else {
                s.refinement += 1;
                continue;
            };
            for (v, b) in coarse_w {
                let term = wu * b;
                match composed.iter_mut().find(|(w, _)| same(w, v)) {
                    Some(e) => e.1 = &e.1 + &term,
                    None => composed.push((v.clone(), term)),
                }
            }
        }
        composed.retain(|(_, w)| !w.is_zero());
        composed.sort();
        if composed != direct {
            s.refinement += 1;
        }
    }
    Ok(())
}

/// Random points of `R [-1, 2]^d` on the mesh `2^-sample_level`.
pub fn random_window_point(rng: &mut impl Rng, d: usize, log2_mesh: i64, sample_level: u32) -> Point {
    let steps = 1i64 << (sample_level as i64 + log2_mesh);
    let w: Vec<i64> = (0..d).map(|_| rng.gen_range(-steps..=2 * steps)).collect();
    Point::from_scaled(&w, sample_level)
}

/// `Lambda^d(v, x) = Lambda^A(v_A, x_A) Lambda^B(v_B, x_B)` for random points and random
/// splits `(A, B)` of the coordinates. Returns `(checks, violations)`.
pub fn lambda_tensor(rng: &mut impl Rng, d: usize, log2_mesh: i64, sample_level: u32, count: usize) -> Result<(usize, usize)> {
    if d < 2 {
        return Ok((0, 0));
    }
    let grid = GridSpec::dyadic(d, -log2_mesh);
    let (mut checks, mut bad) = (0, 0);
    for _ in 0..count {
        let x = random_window_point(rng, d, log2_mesh, sample_level);
        let mask: u32 = rng.gen_range(1..(1u32 << d) - 1);
        let a: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 0).collect();
        let ga = GridSpec::dyadic(a.len(), -log2_mesh);
        let gb = GridSpec::dyadic(b.len(), -log2_mesh);
        let anchor = &cubes_containing(&x, &grid)?[0].index;
        for offs in lattice_box(d, 0, -1, 2) {
            let u: Vec<i64> = anchor.iter().zip(offs.coords()).map(|(w, o)| w + o.to_i64().unwrap()).collect();
            let v = grid.vertex(&u);
            let whole = lambda(&v, &x, &grid)?;
            let split = lambda(&v.project(&a), &x.project(&a), &ga)? * lambda(&v.project(&b), &x.project(&b), &gb)?;
            checks += 1;
            if whole != split {
                bad += 1;
            }
        }
    }
    Ok((checks, bad))
}

/// `|prod x_i - prod y_i| <= |x - y|_1` on random dyadic points of `[0,1]^d`, exactly.
/// Returns `(checks, violations)`.
pub fn product_bound(rng: &mut impl Rng, d: usize, level: u32, count: usize) -> Result<(usize, usize)> {
    let top = 1i64 << level;
    let mut bad = 0;
    for _ in 0..count {
        let x: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=top)).collect();
        let y: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=top)).collect();
        let (x, y) = (Point::from_scaled(&x, level), Point::from_scaled(&y, level));
        let px = x.coords().iter().fold(Dyadic::one(), |acc, c| acc * c);
        let py = y.coords().iter().fold(Dyadic::one(), |acc, c| acc * c);
        if (px - py).abs() > l1_dist(&x, &y)? {
            bad += 1;
        }
    }
    Ok((count, bad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_windows_are_clean() {
        for d in 1..=2 {
            for log2 in [0, -1] {
                let s = lambda_window(d, log2, 3, &[2, 4]).unwrap();
                assert_eq!(s.violations(), 0, "{s:?}");
                assert!(s.boundary_points > 0 && s.lipschitz_pairs > 0);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(lambda_tensor(&mut rng, 3, 0, 3, 20).unwrap().1, 0);
        assert_eq!(product_bound(&mut rng, 3, 4, 200).unwrap().1, 0);
    }
}
