/// Points in reference coordinates and weights. Weights sum to the reference
/// volume (1/6 for the tetrahedron, 1/2 for the triangle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule<const N: usize, const D: usize> {
    pub points: [[f64; D]; N],
    pub weights: [f64; N],
}

// (5 + 3√5)/20 and (5 − √5)/20
const ALPHA: f64 = 0.585_410_196_624_968_5;
const BETA: f64 = 0.138_196_601_125_010_5;

/// Symmetric 4-point rule, exact for polynomials of total degree ≤ 2.
pub fn quadrature_tet4pt() -> QuadratureRule<4, 3> {
    QuadratureRule {
        points: [
            [BETA, BETA, BETA],
            [ALPHA, BETA, BETA],
            [BETA, ALPHA, BETA],
            [BETA, BETA, ALPHA],
        ],
        weights: [1.0 / 24.0; 4],
    }
}

/// 3-point triangle rule, exact for degree ≤ 2.
pub fn quadrature_tri3pt() -> QuadratureRule<3, 2> {
    QuadratureRule {
        points: [
            [1.0 / 6.0, 1.0 / 6.0],
            [2.0 / 3.0, 1.0 / 6.0],
            [1.0 / 6.0, 2.0 / 3.0],
        ],
        weights: [1.0 / 6.0; 3],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ ξ₁^a ξ₂^b ξ₃^c over the reference tet = a! b! c! / (a+b+c+3)!
    fn monomial_exact(a: u32, b: u32, c: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) * fact(c) / fact(a + b + c + 3)
    }

    fn integrate(a: u32, b: u32, c: u32) -> f64 {
        let rule = quadrature_tet4pt();
        rule.points
            .iter()
            .zip(rule.weights)
            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
            .sum()
    }

    #[test]
    fn weights_sum_to_reference_volume() {
        let rule = quadrature_tet4pt();
        assert!((rule.weights.iter().sum::<f64>() - 1.0 / 6.0).abs() < 1e-15);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        let tri = quadrature_tri3pt();
        assert!((tri.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn alpha_beta_closed_forms() {
        let s5 = 5f64.sqrt();
        assert!((ALPHA - (5.0 + 3.0 * s5) / 20.0).abs() < 1e-16);
        assert!((BETA - (5.0 - s5) / 20.0).abs() < 1e-16);
    }

    #[test]
    fn exact_through_degree_two() {
        for a in 0..=2 {
            for b in 0..=(2 - a) {
                for c in 0..=(2 - a - b) {
                    let err = (integrate(a, b, c) - monomial_exact(a, b, c)).abs();
                    assert!(err < 1e-14, "ξ^({a},{b},{c}) error {err}");
                }
            }
        }
        assert!((integrate(1, 1, 0) - 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_is_not_exact() {
        // documents the degree of the rule: ∫ξ₁³ = 1/120 analytically
        let exact = monomial_exact(3, 0, 0);
        assert!((exact - 1.0 / 120.0).abs() < 1e-16);
        assert!((integrate(3, 0, 0) - exact).abs() > 1e-5);
    }
}
