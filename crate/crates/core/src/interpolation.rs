//! The piecewise-multilinear partition of unity `Lambda_R^d` on the vertex lattice `R Z^d`.
//!
//! For `x = R w + R t` with `t` in `[0,1]^d`, the weight of the vertex `R u` is
//! `prod_i hat(t_i, u_i - w_i)`. Evaluation always goes through the lexicographically
//! smallest cube containing `x`; [`lambda_via_cube`] evaluates through an arbitrary one.

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::grid::{containing_indices, Cube, GridSpec, Point};

/// The one-dimensional hat factor: `x` if `w = 1`, `1 - x` if `w = 0`, `0` otherwise.
pub fn hat(x: &Dyadic, w: i64) -> Result<Dyadic> {
    if x.signum() < 0 || *x > Dyadic::one() {
        return Err(Error::OutsideUnitInterval(x.to_string()));
    }
    Ok(hat_unchecked(x, w))
}

fn hat_unchecked(t: &Dyadic, w: i64) -> Dyadic {
    match w {
        1 => t.clone(),
        0 => Dyadic::one() - t,
        _ => Dyadic::zero(),
    }
}

/// Sparse family `(v, Lambda_R^d(v, x))` of nonzero weights, sorted by vertex.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct WeightMap {
    entries: Vec<(Point, Dyadic)>,
}

impl WeightMap {
    pub fn entries(&self) -> &[(Point, Dyadic)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(Point, Dyadic)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, v: &Point) -> Dyadic {
        self.entries
            .binary_search_by(|(p, _)| p.cmp(v))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_default()
    }

    pub fn total(&self) -> Dyadic {
        self.entries.iter().fold(Dyadic::zero(), |acc, (_, w)| acc + w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Point, Dyadic)> {
        self.entries.iter()
    }
}

/// Index `w` of the lexicographically smallest cell containing `c` along one axis and the
/// local coordinate `t` in `(0,1]` (1 only when `c` sits on a grid hyperplane).
fn smallest_cell(c: &Dyadic, grid: &GridSpec) -> (i64, Dyadic) {
    let y = grid.to_grid_units(c);
    let mut f = y.floor_i64().expect("cube index out of i64 range");
    if y.is_integer() {
        f -= 1;
    }
    (f, y - Dyadic::from_int(f))
}

/// `Lambda_R^d(v, x)` where `v` must be a lattice vertex.
pub fn lambda(v: &Point, x: &Point, grid: &GridSpec) -> Result<Dyadic> {
    grid.check_point(x)?;
    grid.check_point(v)?;
    let mut acc = Dyadic::one();
    for (vi, c) in v.coords().iter().zip(x.coords()) {
        let ui = grid.to_grid_units(vi).to_i64().ok_or_else(|| Error::NotOnLattice(v.to_string()))?;
        if acc.is_zero() {
            continue;
        }
        let (w, t) = smallest_cell(c, grid);
        acc = acc * hat_unchecked(&t, ui - w);
    }
    Ok(acc)
}

fn product_weight(u: &[i64], w: &[i64], t: &[Dyadic]) -> Dyadic {
    if u.iter().zip(w).any(|(a, b)| !matches!(a - b, 0 | 1)) {
        return Dyadic::zero();
    }
    let mut acc = Dyadic::one();
    for ((ui, wi), ti) in u.iter().zip(w).zip(t) {
        acc = acc * hat_unchecked(ti, ui - wi);
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// `Lambda_R^d(v, x)` evaluated through a specific cube containing `x`.
pub fn lambda_via_cube(v: &Point, x: &Point, cube: &Cube) -> Result<Dyadic> {
    let grid = cube.grid();
    grid.check_point(x)?;
    if !cube.contains(x) {
        return Err(Error::Precondition(format!("{x} is not in cube {:?}", cube.index)));
    }
    let u = grid.lattice_coords(v)?.ok_or_else(|| Error::NotOnLattice(v.to_string()))?;
    let t: Vec<Dyadic> = x
        .coords()
        .iter()
        .zip(&cube.index)
        .map(|(c, &w)| grid.to_grid_units(c) - Dyadic::from_int(w))
        .collect();
    Ok(product_weight(&u, &cube.index, &t))
}

/// All nonzero weights `Lambda_R^d(., x)`: at most `2^d` vertices of one cube containing `x`.
pub fn lambda_weights(x: &Point, grid: &GridSpec) -> Result<WeightMap> {
    grid.check_point(x)?;
    // Per axis, the nonzero factors `(vertex coordinate, hat)` in increasing order; taking
    // their product in lexicographic order gives vertices in sorted order.
    let factors: Vec<Vec<(Dyadic, Dyadic)>> = x
        .coords()
        .iter()
        .map(|c| {
            let (w, t) = smallest_cell(c, grid);
            [(w, hat_unchecked(&t, 0)), (w + 1, t)]
                .into_iter()
                .filter(|(_, h)| !h.is_zero())
                .map(|(e, h)| (grid.from_grid_units(e), h))
                .collect()
        })
        .collect();
    let count: usize = factors.iter().map(Vec::len).product();
    let mut entries = Vec::with_capacity(count);
    let mut pick = vec![0usize; factors.len()];
    for _ in 0..count {
        let coords: Vec<Dyadic> = pick.iter().zip(&factors).map(|(&k, f)| f[k].0.clone()).collect();
        let weight = pick.iter().zip(&factors).fold(Dyadic::one(), |acc, (&k, f)| acc * &f[k].1);
        entries.push((Point::new(coords).expect("nonempty"), weight));
        for i in (0..pick.len()).rev() {
            pick[i] += 1;
            if pick[i] < factors[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
    Ok(WeightMap { entries })
}

/// All per-coordinate cube choices for `x`; used to exercise well-definedness.
pub fn containing_cube_count(x: &Point, grid: &GridSpec) -> usize {
    containing_indices(x, grid).iter().map(Vec::len).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cubes_containing;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }
    fn p(c: &[&str]) -> Point {
        Point::parse(c).unwrap()
    }

    #[test]
    fn hat_values() {
        assert_eq!(hat(&Dyadic::zero(), 0).unwrap(), Dyadic::one());
        assert_eq!(hat(&d("1/2"), 1).unwrap(), d("1/2"));
        assert_eq!(hat(&d("1/4"), 5).unwrap(), Dyadic::zero());
        assert_eq!(hat(&d("1/4"), 0).unwrap(), d("3/4"));
        assert!(hat(&d("5/4"), 0).is_err());
        assert!(hat(&d("-1/4"), 1).is_err());
    }

    #[test]
    fn lambda_values() {
        let g1 = GridSpec::dyadic(1, 0);
        assert_eq!(lambda(&p(&["0"]), &p(&["1/2"]), &g1).unwrap(), d("1/2"));
        assert_eq!(lambda(&p(&["1"]), &p(&["1"]), &g1).unwrap(), Dyadic::one());
        let g2 = GridSpec::dyadic(2, 0);
        assert_eq!(lambda(&p(&["1", "1"]), &p(&["1/2", "1/4"]), &g2).unwrap(), d("1/8"));
        assert!(lambda(&p(&["1/2"]), &p(&["0"]), &g1).is_err());
        assert!(lambda(&p(&["0", "0"]), &p(&["0"]), &g2).is_err());
    }

    #[test]
    fn weights() {
        let g1 = GridSpec::dyadic(1, 0);
        let w = lambda_weights(&p(&["1/4"]), &g1).unwrap();
        assert_eq!(w.entries(), &[(p(&["0"]), d("3/4")), (p(&["1"]), d("1/4"))]);
        let w = lambda_weights(&p(&["3"]), &g1).unwrap();
        assert_eq!(w.entries(), &[(p(&["3"]), Dyadic::one())]);
        let g2 = GridSpec::dyadic(2, 1);
        let w = lambda_weights(&p(&["1/8", "-5/8"]), &g2).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.total(), Dyadic::one());
    }

    #[test]
    fn well_defined_on_boundaries() {
        let g = GridSpec::dyadic(2, 0);
        let x = p(&["1", "1/2"]);
        for cube in cubes_containing(&x, &g).unwrap() {
            for v in [p(&["0", "0"]), p(&["1", "0"]), p(&["1", "1"]), p(&["2", "1"])] {
                assert_eq!(lambda_via_cube(&v, &x, &cube).unwrap(), lambda(&v, &x, &g).unwrap());
            }
        }
        assert_eq!(containing_cube_count(&x, &g), 2);
    }
}
