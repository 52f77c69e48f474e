//! Points of `R^d` with dyadic coordinates and the hypercube tessellations `{R w + [0,R]^d}`.

use std::fmt;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A point of `R^d` with exact dyadic coordinates. Ordered coordinate-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<Dyadic>);

impl Point {
    pub fn new(coords: Vec<Dyadic>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Parse("a point needs at least one coordinate".into()));
        }
        Ok(Point(coords))
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Point(coords.iter().map(|&c| Dyadic::from_int(c)).collect())
    }

    /// Point with coordinates `coords[i] / 2^level`.
    pub fn from_scaled(coords: &[i64], level: u32) -> Self {
        Point(coords.iter().map(|&c| Dyadic::new(c, level as i64)).collect())
    }

    pub fn parse(coords: &[&str]) -> Result<Self> {
        Point::new(coords.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![Dyadic::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Dyadic] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Dyadic> {
        self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(Dyadic::is_zero)
    }

    /// `max_i |x_i|`.
    pub fn sup_norm(&self) -> Dyadic {
        self.0.iter().map(Dyadic::abs).fold(Dyadic::zero(), Dyadic::max)
    }

    /// Coordinates restricted to the given index subset, in the given order.
    pub fn project(&self, indices: &[usize]) -> Point {
        Point(indices.iter().map(|&i| self.0[i].clone()).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(Dyadic::to_f64).collect()
    }

    pub fn map(&self, f: impl Fn(&Dyadic) -> Dyadic) -> Point {
        Point(self.0.iter().map(f).collect())
    }

    pub(crate) fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `max_i |x_i - y_i|`.
pub fn sup_dist(x: &Point, y: &Point) -> Result<Dyadic> {
    x.check_dim(y)?;
    Ok(x.0.iter().zip(&y.0).map(|(a, b)| (a - b).abs()).fold(Dyadic::zero(), Dyadic::max))
}

/// `sum_i |x_i - y_i|`.
pub fn l1_dist(x: &Point, y: &Point) -> Result<Dyadic> {
    x.check_dim(y)?;
    Ok(x.0.iter().zip(&y.0).fold(Dyadic::zero(), |acc, (a, b)| acc + (a - b).abs()))
}

/// A tessellation of `R^d` into closed cubes of side `mesh`.
///
/// The mesh must be a power of two so that lattice coordinates of dyadic points stay
/// dyadic and every weight of the partition of unity is exactly representable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GridSpec {
    dim: usize,
    log2_mesh: i64,
}

impl GridSpec {
    pub fn new(dim: usize, mesh: &Dyadic) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if mesh.signum() <= 0 {
            return Err(Error::InvalidGrid(format!("mesh must be positive, got {mesh}")));
        }
        match mesh.numerator_i64() {
            Some(n) if n.count_ones() == 1 => {
                let log2 = n.trailing_zeros() as i64 - mesh.exponent() as i64;
                Ok(GridSpec { dim, log2_mesh: log2 })
            }
            _ => Err(Error::InvalidGrid(format!("mesh {mesh} is not a power of two"))),
        }
    }

    /// Grid of mesh `2^-level`.
    pub fn dyadic(dim: usize, level: i64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        GridSpec { dim, log2_mesh: -level }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mesh(&self) -> Dyadic {
        Dyadic::pow2(self.log2_mesh)
    }

    /// `log2` of the mesh.
    pub fn log2_mesh(&self) -> i64 {
        self.log2_mesh
    }

    /// `x / R`, exact.
    pub fn to_grid_units(&self, c: &Dyadic) -> Dyadic {
        c.mul_pow2(-self.log2_mesh)
    }

    /// `R * w`.
    pub fn from_grid_units(&self, w: i64) -> Dyadic {
        Dyadic::from_int(w).mul_pow2(self.log2_mesh)
    }

    /// The lattice point `R * w`.
    pub fn vertex(&self, w: &[i64]) -> Point {
        Point(w.iter().map(|&wi| self.from_grid_units(wi)).collect())
    }

    pub(crate) fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        Ok(())
    }

    /// Integer coordinates `w` with `x = R w`, if `x` is a lattice point.
    pub fn lattice_coords(&self, x: &Point) -> Result<Option<Vec<i64>>> {
        self.check_point(x)?;
        let mut out = Vec::with_capacity(self.dim);
        for c in x.coords() {
            match self.to_grid_units(c).to_i64() {
                Some(w) => out.push(w),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// Ratio `coarse.mesh / self.mesh` when it is a positive integer.
    pub fn refinement_ratio(&self, coarse: &GridSpec) -> Option<u64> {
        let diff = coarse.log2_mesh - self.log2_mesh;
        (self.dim == coarse.dim && (0..63).contains(&diff)).then(|| 1u64 << diff)
    }
}

/// The closed cube `R w + [0, R]^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cube {
    pub index: Vec<i64>,
    log2_mesh: i64,
}

impl Cube {
    pub fn new(grid: &GridSpec, index: Vec<i64>) -> Result<Self> {
        if index.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: index.len() });
        }
        Ok(Cube { index, log2_mesh: grid.log2_mesh })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { dim: self.index.len(), log2_mesh: self.log2_mesh }
    }

    /// The `2^d` vertices `R w + R eps`, `eps` in `{0,1}^d`, in lexicographic order.
    pub fn vertices(&self) -> Vec<Point> {
        let grid = self.grid();
        let d = self.index.len();
        (0..1u64 << d)
            .map(|mask| {
                let w: Vec<i64> = (0..d)
                    .map(|i| self.index[i] + ((mask >> (d - 1 - i)) & 1) as i64)
                    .collect();
                grid.vertex(&w)
            })
            .collect()
    }

    pub fn contains(&self, x: &Point) -> bool {
        let grid = self.grid();
        x.dim() == self.index.len()
            && x.coords().iter().zip(&self.index).all(|(c, &w)| {
                let y = grid.to_grid_units(c);
                y >= Dyadic::from_int(w) && y <= Dyadic::from_int(w + 1)
            })
    }
}

/// Per-coordinate candidate cube indices: one when `x_i / R` is not an integer, two otherwise.
pub(crate) fn containing_indices(x: &Point, grid: &GridSpec) -> Vec<Vec<i64>> {
    x.coords()
        .iter()
        .map(|c| {
            let y = grid.to_grid_units(c);
            let f = y.floor_i64().expect("cube index out of i64 range");
            if y.is_integer() {
                vec![f - 1, f]
            } else {
                vec![f]
            }
        })
        .collect()
}

/// All cubes of the grid containing `x`, sorted by index.
pub fn cubes_containing(x: &Point, grid: &GridSpec) -> Result<Vec<Cube>> {
    grid.check_point(x)?;
    let per_coord = containing_indices(x, grid);
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for choices in &per_coord {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out.sort();
    Ok(out.into_iter().map(|index| Cube { index, log2_mesh: grid.log2_mesh }).collect())
}

/// The points `2^-level w` with every `w_i` in `lo..=hi`, in lexicographic order.
pub fn lattice_box(dim: usize, level: u32, lo: i64, hi: i64) -> Vec<Point> {
    let mut out = Vec::new();
    if dim == 0 || lo > hi {
        return out;
    }
    let mut w = vec![lo; dim];
    loop {
        out.push(Point::from_scaled(&w, level));
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if w[k] < hi {
                w[k] += 1;
                break;
            }
            w[k] = lo;
        }
    }
}

/// `Some(x)` if `x` is a vertex of the grid, `None` otherwise.
pub fn grid_snap(x: &Point, grid: &GridSpec) -> Result<Option<Point>> {
    Ok(grid.lattice_coords(x)?.map(|_| x.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[&str]) -> Point {
        Point::parse(c).unwrap()
    }

    #[test]
    fn distances() {
        let o = p(&["0", "0"]);
        assert_eq!(sup_dist(&o, &o).unwrap(), Dyadic::zero());
        assert_eq!(sup_dist(&p(&["1/2", "0"]), &p(&["0", "1/4"])).unwrap(), "1/2".parse().unwrap());
        assert_eq!(sup_dist(&p(&["3/4"]), &p(&["-1/4"])).unwrap(), Dyadic::one());
        assert_eq!(l1_dist(&o, &o).unwrap(), Dyadic::zero());
        assert_eq!(l1_dist(&p(&["1/2", "0"]), &p(&["0", "1/4"])).unwrap(), "3/4".parse().unwrap());
        assert!(sup_dist(&o, &p(&["1"])).is_err());
    }

    #[test]
    fn containing_cubes() {
        let g = GridSpec::new(1, &Dyadic::one()).unwrap();
        let c = cubes_containing(&p(&["1/2"]), &g).unwrap();
        assert_eq!(c.iter().map(|c| c.index.clone()).collect::<Vec<_>>(), vec![vec![0]]);
        let c = cubes_containing(&p(&["1"]), &g).unwrap();
        assert_eq!(c.iter().map(|c| c.index.clone()).collect::<Vec<_>>(), vec![vec![0], vec![1]]);
    }

    #[test]
    fn containing_cubes_brute_force() {
        // x = (0, 0), R = 1: enumerate a window of indices and test containment directly.
        let g = GridSpec::new(2, &Dyadic::one()).unwrap();
        let x = p(&["0", "0"]);
        let mut brute = vec![];
        for a in -3..=3 {
            for b in -3..=3 {
                let cube = Cube::new(&g, vec![a, b]).unwrap();
                if cube.contains(&x) {
                    brute.push(vec![a, b]);
                }
            }
        }
        let got: Vec<_> = cubes_containing(&x, &g).unwrap().into_iter().map(|c| c.index).collect();
        assert_eq!(got, brute);
        assert_eq!(got, vec![vec![-1, -1], vec![-1, 0], vec![0, -1], vec![0, 0]]);
    }

    #[test]
    fn snapping() {
        let half = GridSpec::new(1, &"1/2".parse().unwrap()).unwrap();
        let one = GridSpec::new(1, &Dyadic::one()).unwrap();
        assert!(grid_snap(&p(&["1/2"]), &half).unwrap().is_some());
        assert!(grid_snap(&p(&["1/2"]), &one).unwrap().is_none());
        let quarter = GridSpec::new(2, &"1/4".parse().unwrap()).unwrap();
        assert!(grid_snap(&p(&["3/4", "-1/4"]), &quarter).unwrap().is_some());
    }

    #[test]
    fn mesh_must_be_power_of_two() {
        assert!(GridSpec::new(1, &Dyadic::from_int(3)).is_err());
        assert!(GridSpec::new(1, &Dyadic::zero()).is_err());
        assert!(GridSpec::new(1, &"-1/2".parse().unwrap()).is_err());
        assert_eq!(GridSpec::new(2, &Dyadic::from_int(4)).unwrap().log2_mesh(), 2);
        assert_eq!(GridSpec::new(2, &"1/8".parse().unwrap()).unwrap().log2_mesh(), -3);
    }

    #[test]
    fn cube_vertices() {
        let g = GridSpec::dyadic(2, 1);
        let cube = Cube::new(&g, vec![1, -1]).unwrap();
        let v = cube.vertices();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], p(&["1/2", "-1/2"]));
        assert_eq!(v[3], p(&["1", "0"]));
    }
}
