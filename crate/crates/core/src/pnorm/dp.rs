//! Minimization over spanning trees by dynamic programming on subsets.
//!
//! `F(r, S)` is the cheapest tree hanging below node `r` that spans exactly the nodes of `S`
//! (with `r` not in `S`). The component containing the lowest node of `S` hangs from `r` by a
//! single edge `(c, r)` carrying flow `s(T)`:
//!
//! ```text
//! F(r, S) = min_{lowbit(S) in T subset S} H(r, T) + F(r, S \ T)
//! H(r, T) = min_{c in T} F(c, T \ {c}) + |s(T)|^p d(r, c)^p
//! ```
//!
//! The norm is `F(base, all other nodes)`, with the base labeled `n - 1`.

use super::FlowTable;

/// Reusable tables for repeated solves on `n` nodes.
pub(crate) struct DpSolver {
    n: usize,
    size: usize,
    f: Vec<f64>,
    f_choice: Vec<u32>,
    h: Vec<f64>,
    h_choice: Vec<u8>,
    /// Nonempty subsets of the non-base nodes, grouped by size: `groups[k]` spans
    /// `order[groups[k]..groups[k + 1]]`.
    order: Vec<usize>,
    groups: Vec<usize>,
}

impl DpSolver {
    pub fn new(n: usize) -> Self {
        assert!((2..=24).contains(&n), "subset solver supports 2..=24 nodes");
        let m = n - 1;
        let size = 1usize << m;
        let mut order: Vec<usize> = (1..size).collect();
        order.sort_by_key(|s| s.count_ones());
        let mut groups = vec![0];
        for k in 1..=m as u32 {
            let end = groups.last().unwrap() + order[*groups.last().unwrap()..].iter().take_while(|s| s.count_ones() == k).count();
            groups.push(end);
        }
        DpSolver {
            n,
            size,
            f: vec![0.0; n * size],
            f_choice: vec![0; n * size],
            h: vec![0.0; n * size],
            h_choice: vec![0; n * size],
            order,
            groups,
        }
    }

    /// Minimum cost for subset weights `w[T]` (indexed by masks over the non-base nodes) and
    /// edge weights `dist[i * n + j]`.
    pub fn solve(&mut self, w: &[f64], dist: &[f64]) -> f64 {
        let (n, size) = (self.n, self.size);
        let m = n - 1;
        for r in 0..n {
            self.f[r * size] = 0.0;
        }
        for g in 0..self.groups.len() - 1 {
            let group = &self.order[self.groups[g]..self.groups[g + 1]];
            for &t in group {
                let wt = w[t];
                for r in (0..n).filter(|&r| r == m || t >> r & 1 == 0) {
                    let mut best = f64::INFINITY;
                    let mut arg = 0u8;
                    let mut bits = t;
                    while bits != 0 {
                        let c = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let v = self.f[c * size + (t ^ 1 << c)] + wt * dist[r * n + c];
                        if v < best {
                            best = v;
                            arg = c as u8;
                        }
                    }
                    self.h[r * size + t] = best;
                    self.h_choice[r * size + t] = arg;
                }
            }
            for &s in group {
                let low = s & s.wrapping_neg();
                let rest = s ^ low;
                for r in (0..n).filter(|&r| r == m || s >> r & 1 == 0) {
                    if s == size - 1 && r != m {
                        continue;
                    }
                    let mut best = f64::INFINITY;
                    let mut arg = 0u32;
                    let mut sub = rest;
                    loop {
                        let t = sub | low;
                        let v = self.h[r * size + t] + self.f[r * size + (s ^ t)];
                        if v < best {
                            best = v;
                            arg = t as u32;
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & rest;
                    }
                    self.f[r * size + s] = best;
                    self.f_choice[r * size + s] = arg;
                }
            }
        }
        self.f[m * size + size - 1]
    }

    /// Edges of the tree found by the last [`DpSolver::solve`], sorted.
    pub fn witness(&self) -> Vec<(usize, usize)> {
        let (n, size) = (self.n, self.size);
        let mut edges = Vec::with_capacity(n - 1);
        let mut stack = vec![(n - 1, size - 1)];
        while let Some((r, s)) = stack.pop() {
            if s == 0 {
                continue;
            }
            let t = self.f_choice[r * size + s] as usize;
            let c = self.h_choice[r * size + t] as usize;
            edges.push((c.min(r), c.max(r)));
            stack.push((c, t ^ 1 << c));
            stack.push((r, s ^ t));
        }
        edges.sort_unstable();
        edges
    }
}

pub(super) fn minimize(table: &FlowTable, p: f64) -> (f64, Vec<(usize, usize)>) {
    let (w, dist) = table.powered(p);
    let mut solver = DpSolver::new(table.n);
    let cost = solver.solve(&w, &dist);
    (cost, solver.witness())
}
