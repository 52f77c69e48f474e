//! Explicit constants bounding the retraction and basis projections.

/// Lipschitz constant of the lattice retraction: `(1 + 2d(2^d - 1))^(1/p)`.
pub fn retraction_constant(p: f64, d: usize) -> f64 {
    retraction_constant_pth(d).powf(1.0 / p)
}

/// `1 + 2d(2^d - 1)`, the retraction constant raised to the power `p`.
pub fn retraction_constant_pth(d: usize) -> f64 {
    1.0 + 2.0 * d as f64 * (cube_vertex_factor(d))
}

/// `2^d - 1`: the within-cube factor in `||r(x) - r(y)||^p <= (2^d - 1) |x - y|_1^p`.
pub fn cube_vertex_factor(d: usize) -> f64 {
    ((1u64 << d) - 1) as f64
}

/// Sup-metric envelope `d 2^((1-p)/p) (1 + 2d(2^d - 1))^(1/p)` dominating every case of the
/// retraction estimate.
pub fn retraction_envelope(p: f64, d: usize) -> f64 {
    d as f64 * 2f64.powf((1.0 - p) / p) * retraction_constant(p, d)
}

/// Glue constant of the cube-basis block projections: `(1 + 2^(1/p)) 2^(1/p - 1) C`.
pub fn cube_glue_constant(p: f64, d: usize) -> f64 {
    (1.0 + 2f64.powf(1.0 / p)) * 2f64.powf(1.0 / p - 1.0) * retraction_constant(p, d)
}

/// Glue constant of the shell projections: `1 + 2^(1/p)`.
pub fn shell_glue_constant(p: f64) -> f64 {
    1.0 + 2f64.powf(1.0 / p)
}

/// Unconditional constant bound for cube-basis blocks: `C C_1`.
pub fn cube_block_bound(p: f64, d: usize) -> f64 {
    retraction_constant(p, d) * cube_glue_constant(p, d)
}

/// Unconditional constant bound for shell blocks: `C (1 + 2^(1/p))`.
pub fn shell_block_bound(p: f64, d: usize) -> f64 {
    retraction_constant(p, d) * shell_glue_constant(p)
}

/// Partial-sum envelope for the cube basis: `2^(1/p) C C_1`.
pub fn cube_partial_sum_envelope(p: f64, d: usize) -> f64 {
    2f64.powf(1.0 / p) * cube_block_bound(p, d)
}

/// Partial-sum envelope for the `R^d` basis: `2^(1/p) C (1 + 2^(1/p))`.
pub fn rd_partial_sum_envelope(p: f64, d: usize) -> f64 {
    2f64.powf(1.0 / p) * shell_block_bound(p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(retraction_constant(1.0, 1), 3.0);
        assert_eq!(retraction_constant(0.5, 1), 9.0);
        assert_eq!(retraction_constant(1.0, 2), 13.0);
        assert_eq!(retraction_envelope(1.0, 1), 3.0);
        assert_eq!(retraction_envelope(0.5, 1), 18.0);
        assert_eq!(shell_glue_constant(0.5), 5.0);
        assert_eq!(cube_glue_constant(1.0, 1), 9.0);
    }
}
