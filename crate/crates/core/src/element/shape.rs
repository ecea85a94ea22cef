//! Lagrange shape functions on the reference tetrahedron
//! `{ξ ≥ 0, ξ₁ + ξ₂ + ξ₃ ≤ 1}`.
//!
//! Barycentric coordinates are `L₀ = 1 − ξ₁ − ξ₂ − ξ₃`, `Lᵢ = ξᵢ`. Node order
//! of the ten-node element follows the VTK quadratic tetrahedron: corners
//! 0–3, then the midpoints of the edges listed in [`TET10_EDGES`].

/// Corner pairs of the six edges, in midside-node order (nodes 4..10).
pub const TET10_EDGES: [(usize, usize); 6] = [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)];

/// Corner pairs of the three edges of a six-node triangle (nodes 3..6).
pub const TRI6_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    /// Quadratic, ten nodes; interpolates displacement.
    Tet10Displacement,
    /// Linear, four nodes; interpolates pressure.
    Tet4Pressure,
}

/// Shape function values and reference-coordinate gradients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEval<const N: usize> {
    pub values: [f64; N],
    pub gradients: [[f64; 3]; N],
}

const BARY_GRAD: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

#[inline]
fn barycentric(xi: [f64; 3]) -> [f64; 4] {
    [1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]
}

#[inline]
fn debug_check_inside(xi: [f64; 3]) {
    debug_assert!(
        barycentric(xi)
            .iter()
            .all(|&l| (-1e-12..=1.0 + 1e-12).contains(&l)),
        "reference point {xi:?} lies outside the reference tetrahedron"
    );
}

/// Linear (four-node) shape functions.
pub fn shape_tet4(xi: [f64; 3]) -> ShapeEval<4> {
    debug_check_inside(xi);
    ShapeEval {
        values: barycentric(xi),
        gradients: BARY_GRAD,
    }
}

/// Quadratic (ten-node) shape functions.
pub fn shape_tet10(xi: [f64; 3]) -> ShapeEval<10> {
    debug_check_inside(xi);
    let l = barycentric(xi);
    let mut values = [0.0; 10];
    let mut gradients = [[0.0; 3]; 10];
    for i in 0..4 {
        values[i] = l[i] * (2.0 * l[i] - 1.0);
        let s = 4.0 * l[i] - 1.0;
        for d in 0..3 {
            gradients[i][d] = s * BARY_GRAD[i][d];
        }
    }
    for (e, &(a, b)) in TET10_EDGES.iter().enumerate() {
        values[4 + e] = 4.0 * l[a] * l[b];
        for d in 0..3 {
            gradients[4 + e][d] = 4.0 * (l[b] * BARY_GRAD[a][d] + l[a] * BARY_GRAD[b][d]);
        }
    }
    ShapeEval { values, gradients }
}

/// Quadratic six-node triangle values at reference point `(s, t)`; used for
/// surface loads. Gradients are with respect to `(s, t)` (third entry zero).
pub fn shape_tri6(st: [f64; 2]) -> ShapeEval<6> {
    let l = [1.0 - st[0] - st[1], st[0], st[1]];
    let dl = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut values = [0.0; 6];
    let mut gradients = [[0.0; 3]; 6];
    for i in 0..3 {
        values[i] = l[i] * (2.0 * l[i] - 1.0);
        for d in 0..2 {
            gradients[i][d] = (4.0 * l[i] - 1.0) * dl[i][d];
        }
    }
    for (e, &(a, b)) in TRI6_EDGES.iter().enumerate() {
        values[3 + e] = 4.0 * l[a] * l[b];
        for d in 0..2 {
            gradients[3 + e][d] = 4.0 * (l[b] * dl[a][d] + l[a] * dl[b][d]);
        }
    }
    ShapeEval { values, gradients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::quadrature_tet4pt;

    const CORNERS: [[f64; 3]; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    fn node_coords() -> [[f64; 3]; 10] {
        let mut x = [[0.0; 3]; 10];
        x[..4].copy_from_slice(&CORNERS);
        for (e, &(a, b)) in TET10_EDGES.iter().enumerate() {
            for d in 0..3 {
                x[4 + e][d] = 0.5 * (CORNERS[a][d] + CORNERS[b][d]);
            }
        }
        x
    }

    #[test]
    fn tet10_kronecker_property() {
        for (i, xi) in node_coords().iter().enumerate() {
            let s = shape_tet10(*xi);
            for (j, v) in s.values.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-15, "N_{j}(node {i}) = {v}");
            }
        }
    }

    #[test]
    fn tet4_kronecker_property() {
        for (i, xi) in CORNERS.iter().enumerate() {
            let s = shape_tet4(*xi);
            for (j, v) in s.values.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points_and_centroid() {
        let rule = quadrature_tet4pt();
        let mut points = rule.points.to_vec();
        points.push([0.25, 0.25, 0.25]);
        for xi in points {
            let s10 = shape_tet10(xi);
            let s4 = shape_tet4(xi);
            assert!((s10.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((s4.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for d in 0..3 {
                let g10: f64 = s10.gradients.iter().map(|g| g[d]).sum();
                let g4: f64 = s4.gradients.iter().map(|g| g[d]).sum();
                assert!(g10.abs() < 1e-12 && g4.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_field_reproduced_at_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let nodes = node_coords();
        for _ in 0..10 {
            let mut xi = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let s: f64 = xi.iter().sum();
            if s > 1.0 {
                xi.iter_mut().for_each(|v| *v /= s * 1.01);
            }
            // f(x) = 2 + 3x − y + 0.5z, interpolated from nodal values
            let f = |p: &[f64; 3]| 2.0 + 3.0 * p[0] - p[1] + 0.5 * p[2];
            let s10 = shape_tet10(xi);
            let s4 = shape_tet4(xi);
            let i10: f64 = (0..10).map(|a| s10.values[a] * f(&nodes[a])).sum();
            let i4: f64 = (0..4).map(|a| s4.values[a] * f(&CORNERS[a])).sum();
            assert!((i10 - f(&xi)).abs() < 1e-13);
            assert!((i4 - f(&xi)).abs() < 1e-13);
            // Σ Nᵢ xᵢ = x
            for d in 0..3 {
                let x: f64 = (0..10).map(|a| s10.values[a] * nodes[a][d]).sum();
                assert!((x - xi[d]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tet10_gradients_match_finite_differences() {
        let xi = [0.2, 0.3, 0.1];
        let s = shape_tet10(xi);
        let h = 1e-6;
        for d in 0..3 {
            let mut p = xi;
            let mut m = xi;
            p[d] += h;
            m[d] -= h;
            let (sp, sm) = (shape_tet10(p), shape_tet10(m));
            for a in 0..10 {
                let fd = (sp.values[a] - sm.values[a]) / (2.0 * h);
                assert!((fd - s.gradients[a][d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tri6_partition_of_unity() {
        let s = shape_tri6([0.2, 0.5]);
        assert!((s.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
