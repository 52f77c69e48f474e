//! Exhaustive minimization over labeled spanning trees via Prüfer sequences.

use rayon::prelude::*;

use super::FlowTable;

#[derive(Clone, Copy)]
struct Best {
    cost: f64,
    index: u64,
    cost_1: f64,
}

impl Best {
    fn merge(self, other: Best) -> Best {
        let cost_1 = self.cost_1.min(other.cost_1);
        let winner = if other.cost < self.cost || (other.cost == self.cost && other.index < self.index) {
            other
        } else {
            self
        };
        Best { cost_1, ..winner }
    }
}

/// Decodes `seq` and calls `visit(child, parent, subtree_mask)` for every edge.
#[inline]
fn decode(n: usize, seq: &[usize], degree: &mut [u32], mask: &mut [usize], mut visit: impl FnMut(usize, usize, usize)) {
    for i in 0..n {
        degree[i] = 1;
        mask[i] = 1 << i;
    }
    for &s in seq {
        degree[s] += 1;
    }
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &s in seq {
        visit(leaf, s, mask[leaf]);
        mask[s] |= mask[leaf];
        degree[s] -= 1;
        if s < ptr && degree[s] == 1 {
            leaf = s;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    visit(leaf, n - 1, mask[leaf]);
}

fn sequence_of(n: usize, mut index: u64) -> Vec<usize> {
    let len = n - 2;
    let mut seq = vec![0; len];
    for k in (0..len).rev() {
        seq[k] = (index % n as u64) as usize;
        index /= n as u64;
    }
    seq
}

/// Returns `(min p-cost, min 1-cost, edges of the p-optimal tree)`.
pub(super) fn minimize(table: &FlowTable, p: f64) -> (f64, f64, Vec<(usize, usize)>) {
    let n = table.n;
    let (mass_p, dist_p) = table.powered(p);
    let (mass_1, dist_1) = (&table.mass, &table.dist);
    if n == 2 {
        let c = mass_p[1] * dist_p[1];
        return (c, mass_1[1] * dist_1[1], vec![(0, 1)]);
    }
    let len = n - 2;
    let block = (n as u64).pow(len as u32 - 1);
    let best = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut seq = vec![0usize; len];
            seq[0] = first;
            let mut degree = vec![0u32; n];
            let mut mask = vec![0usize; n];
            let mut best = Best { cost: f64::INFINITY, index: u64::MAX, cost_1: f64::INFINITY };
            for offset in 0..block {
                let mut cost = 0.0;
                let mut cost_1 = 0.0;
                decode(n, &seq, &mut degree, &mut mask, |c, parent, m| {
                    cost += mass_p[m] * dist_p[c * n + parent];
                    cost_1 += mass_1[m] * dist_1[c * n + parent];
                });
                if cost < best.cost {
                    best.cost = cost;
                    best.index = first as u64 * block + offset;
                }
                if cost_1 < best.cost_1 {
                    best.cost_1 = cost_1;
                }
                for k in (1..len).rev() {
                    seq[k] += 1;
                    if seq[k] < n {
                        break;
                    }
                    seq[k] = 0;
                }
            }
            best
        })
        .reduce(
            || Best { cost: f64::INFINITY, index: u64::MAX, cost_1: f64::INFINITY },
            Best::merge,
        );
    let seq = sequence_of(n, best.index);
    let mut edges = Vec::with_capacity(n - 1);
    let mut degree = vec![0u32; n];
    let mut mask = vec![0usize; n];
    decode(n, &seq, &mut degree, &mut mask, |c, parent, _| edges.push((c.min(parent), c.max(parent))));
    edges.sort_unstable();
    (best.cost, best.cost_1, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decodes_known_sequence() {
        // Sequence (3, 3, 3, 4) on 6 nodes: edges 0-3, 1-3, 2-3, 3-4, 4-5.
        let mut edges = vec![];
        let mut degree = vec![0; 6];
        let mut mask = vec![0; 6];
        decode(6, &[3, 3, 3, 4], &mut degree, &mut mask, |c, p, _| edges.push((c, p)));
        assert_eq!(edges, vec![(0, 3), (1, 3), (2, 3), (3, 4), (4, 5)]);
    }

    #[test]
    fn subtree_masks_exclude_last_node() {
        let mut degree = vec![0; 5];
        let mut mask = vec![0; 5];
        decode(5, &[1, 2, 1], &mut degree, &mut mask, |_, _, m| assert_eq!(m & (1 << 4), 0));
    }

    #[test]
    fn counts_all_trees() {
        // Cayley: 4^2 = 16 distinct edge sets on 4 nodes.
        let mut seen = std::collections::BTreeSet::new();
        for idx in 0..16 {
            let mut edges = vec![];
            let mut degree = vec![0; 4];
            let mut mask = vec![0; 4];
            decode(4, &sequence_of(4, idx), &mut degree, &mut mask, |c, p, _| edges.push((c.min(p), c.max(p))));
            edges.sort();
            seen.insert(edges);
        }
        assert_eq!(seen.len(), 16);
    }
}
