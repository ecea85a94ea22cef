//! Compressible Neo-Hookean skeleton and Darcy permeability.
//!
//! Voigt convention used everywhere in the crate: component order
//! `(11, 22, 33, 12, 23, 13)`. Stress-like quantities store tensor
//! components; strain-like quantities (and the columns of B-matrices) use
//! engineering shear `γᵢⱼ = 2εᵢⱼ`, so that `σ : ε = σ_V · ε_V`.

use nalgebra::{Matrix3, Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::math;

/// Tensor index pairs of the six Voigt slots.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

/// Lamé constants of the solid skeleton, MPa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeoHookeParams {
    pub lambda: f64,
    pub mu: f64,
}

impl NeoHookeParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Config(alloc::format!("mu must be > 0, got {mu}")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    /// Constrained (oedometer) modulus λ + 2μ.
    pub fn constrained_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }
}

/// Isotropic, constant Darcy permeability, mm⁴ N⁻¹ s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermeabilityParams {
    pub k: f64,
}

impl PermeabilityParams {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "permeability must be > 0, got {k}"
            )));
        }
        Ok(Self { k })
    }
}

/// Deformation gradient with its cached invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub f: Matrix3<f64>,
    /// det F
    pub j: f64,
    /// tr(FᵀF)
    pub i_c: f64,
}

impl Kinematics {
    /// Fails with [`Error::Geometry`] when `det F ≤ 0`.
    pub fn new(f: Matrix3<f64>) -> Result<Self> {
        let j = f.determinant();
        if !(j > 0.0) {
            return Err(Error::Geometry(alloc::format!(
                "non-positive volume ratio J = {j:e}"
            )));
        }
        Ok(Self {
            f,
            j,
            i_c: f.norm_squared(),
        })
    }

    pub fn identity() -> Self {
        Self {
            f: Matrix3::identity(),
            j: 1.0,
            i_c: 3.0,
        }
    }

    /// Left Cauchy–Green tensor b = FFᵀ.
    pub fn left_cauchy_green(&self) -> Matrix3<f64> {
        self.f * self.f.transpose()
    }
}

/// A hyperelastic skeleton: energy, its push-forward stress and the spatial
/// tangent consistent with that stress.
pub trait SolidModel {
    /// Stored energy per unit reference volume, MPa.
    fn strain_energy(&self, kin: &Kinematics) -> f64;
    /// Cauchy (effective) stress, MPa.
    fn cauchy_stress(&self, kin: &Kinematics) -> Matrix3<f64>;
    /// Spatial elasticity tensor (Kirchhoff tangent / J) in Voigt form, MPa.
    fn spatial_tangent(&self, kin: &Kinematics) -> Matrix6<f64>;
}

impl<T: SolidModel + ?Sized> SolidModel for &T {
    fn strain_energy(&self, kin: &Kinematics) -> f64 {
        (**self).strain_energy(kin)
    }

    fn cauchy_stress(&self, kin: &Kinematics) -> Matrix3<f64> {
        (**self).cauchy_stress(kin)
    }

    fn spatial_tangent(&self, kin: &Kinematics) -> Matrix6<f64> {
        (**self).spatial_tangent(kin)
    }
}

impl SolidModel for NeoHookeParams {
    fn strain_energy(&self, kin: &Kinematics) -> f64 {
        strain_energy(kin, self)
    }

    fn cauchy_stress(&self, kin: &Kinematics) -> Matrix3<f64> {
        cauchy_stress(kin, self)
    }

    fn spatial_tangent(&self, kin: &Kinematics) -> Matrix6<f64> {
        spatial_tangent(kin, self)
    }
}

/// Φ = μ/2 (I_C − 3) − μ ln J + λ/2 (ln J)².
pub fn strain_energy(kin: &Kinematics, p: &NeoHookeParams) -> f64 {
    let ln_j = math::ln(kin.j);
    0.5 * p.mu * (kin.i_c - 3.0) - p.mu * ln_j + 0.5 * p.lambda * ln_j * ln_j
}

/// σ = (μ/J)(b − I) + (λ/J) ln J · I.
pub fn cauchy_stress(kin: &Kinematics, p: &NeoHookeParams) -> Matrix3<f64> {
    let b = kin.left_cauchy_green();
    let ln_j = math::ln(kin.j);
    (b - Matrix3::identity()) * (p.mu / kin.j) + Matrix3::identity() * (p.lambda * ln_j / kin.j)
}

/// c = λ′ I⊗I + 2μ′ 𝕀ˢʸᵐ with λ′ = λ/J and μ′ = (μ − λ ln J)/J.
pub fn spatial_tangent(kin: &Kinematics, p: &NeoHookeParams) -> Matrix6<f64> {
    let ln_j = math::ln(kin.j);
    let lam = p.lambda / kin.j;
    let mu = (p.mu - p.lambda * ln_j) / kin.j;
    isotropic_tangent(lam, mu)
}

/// `λ I⊗I + 2μ 𝕀ˢʸᵐ` in Voigt form (engineering shear columns).
pub fn isotropic_tangent(lambda: f64, mu: f64) -> Matrix6<f64> {
    let mut c = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            c[(i, j)] = lambda;
        }
        c[(i, i)] += 2.0 * mu;
        c[(i + 3, i + 3)] = mu;
    }
    c
}

/// ln J at which μ′ changes sign; the tangent loses positive definiteness
/// beyond it.
pub fn tangent_shear_limit_ln_j(p: &NeoHookeParams) -> f64 {
    if p.lambda == 0.0 {
        f64::INFINITY
    } else {
        p.mu / p.lambda
    }
}

/// Symmetric tensor → stress-like Voigt vector.
pub fn to_voigt(t: &Matrix3<f64>) -> Vector6<f64> {
    Vector6::from_fn(|k, _| {
        let (i, j) = VOIGT_PAIRS[k];
        t[(i, j)]
    })
}

/// Stress-like Voigt vector → symmetric tensor.
pub fn from_voigt(v: &Vector6<f64>) -> Matrix3<f64> {
    let mut t = Matrix3::zeros();
    for (k, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
        t[(i, j)] = v[k];
        t[(j, i)] = v[k];
    }
    t
}

/// Symmetric strain tensor → engineering-shear Voigt vector.
pub fn strain_to_voigt(e: &Matrix3<f64>) -> Vector6<f64> {
    Vector6::from_fn(|k, _| {
        let (i, j) = VOIGT_PAIRS[k];
        if i == j {
            e[(i, j)]
        } else {
            2.0 * e[(i, j)]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CARTILAGE: NeoHookeParams = NeoHookeParams {
        lambda: 0.2,
        mu: 0.5,
    };

    fn kin(f: Matrix3<f64>) -> Kinematics {
        Kinematics::new(f).unwrap()
    }

    #[test]
    fn identity_is_stress_and_energy_free() {
        let k = Kinematics::identity();
        assert_eq!(strain_energy(&k, &CARTILAGE), 0.0);
        assert_eq!(cauchy_stress(&k, &CARTILAGE), Matrix3::zeros());
        assert_eq!(spatial_tangent(&k, &CARTILAGE), isotropic_tangent(0.2, 0.5));
    }

    #[test]
    fn uniaxial_stretch_energy_two_codings() {
        let k = kin(Matrix3::from_diagonal(&nalgebra::Vector3::new(
            1.1, 1.0, 1.0,
        )));
        // written out: 0.25·(3.21 − 3) − 0.5·ln 1.1 + 0.1·(ln 1.1)²
        let l = 1.1f64.ln();
        let expected = 0.25 * (3.21 - 3.0) - 0.5 * l + 0.1 * l * l;
        assert!((strain_energy(&k, &CARTILAGE) - expected).abs() < 1e-15);
        // independent: principal-stretch form Σ μ/2(λᵢ² − 1) − μ ln J + λ/2 ln²J
        let stretches = [1.1f64, 1.0, 1.0];
        let alt: f64 = stretches
            .iter()
            .map(|s| 0.5 * 0.5 * (s * s - 1.0))
            .sum::<f64>()
            - 0.5 * l
            + 0.5 * 0.2 * l * l;
        assert!((strain_energy(&k, &CARTILAGE) - alt).abs() < 1e-15);
        assert!((expected - 0.005_753_313).abs() < 1e-9);
    }

    #[test]
    fn energy_grows_under_volumetric_collapse() {
        let phi = |a: f64| strain_energy(&kin(Matrix3::identity() * a), &CARTILAGE);
        assert!(phi(0.01) > phi(0.5));
        assert!(phi(0.5) > phi(1.0));
        assert_eq!(phi(1.0), 0.0);
    }

    #[test]
    fn rotation_is_stress_free() {
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
        let s = cauchy_stress(&kin(r), &CARTILAGE);
        assert!(s.abs().max() < 1e-15);
    }

    #[test]
    fn inverted_gradient_rejected() {
        let f = Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 1.0, 1.0));
        assert!(matches!(Kinematics::new(f), Err(Error::Geometry(_))));
        assert!(Kinematics::new(Matrix3::zeros()).is_err());
    }

    #[test]
    fn tangent_positive_shear_in_solver_range() {
        // μ′ > 0 iff ln J < μ/λ = 2.5; 1% compression keeps |ln J| ≪ 1
        assert_eq!(tangent_shear_limit_ln_j(&CARTILAGE), 2.5);
        for j in [0.9f64, 0.99, 1.0, 1.01, 1.1] {
            let k = kin(Matrix3::identity() * j.cbrt());
            let c = spatial_tangent(&k, &CARTILAGE);
            assert!(c[(3, 3)] > 0.0);
        }
    }

    #[test]
    fn voigt_round_trip() {
        let t = Matrix3::new(1.0, 4.0, 6.0, 4.0, 2.0, 5.0, 6.0, 5.0, 3.0);
        let v = to_voigt(&t);
        assert_eq!(v, Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        assert_eq!(from_voigt(&v), t);
        // σ:ε == σ_V·ε_V with engineering shear
        let e = Matrix3::new(0.1, 0.02, 0.03, 0.02, 0.2, 0.05, 0.03, 0.05, 0.3);
        let contraction: f64 = t.component_mul(&e).sum();
        assert!((contraction - to_voigt(&t).dot(&strain_to_voigt(&e))).abs() < 1e-15);
        // 4th-order tangent round trip: c:ε computed with the tensor form
        let c = isotropic_tangent(0.2, 0.5);
        let sig = from_voigt(&(c * strain_to_voigt(&e)));
        let direct = Matrix3::identity() * (0.2 * e.trace()) + e * (2.0 * 0.5);
        assert!((sig - direct).abs().max() < 1e-15);
    }

    #[test]
    fn params_validated() {
        assert!(NeoHookeParams::new(0.2, 0.0).is_err());
        assert!(NeoHookeParams::new(-0.1, 0.5).is_err());
        assert!(NeoHookeParams::new(0.0, 0.5).is_ok());
        assert!(PermeabilityParams::new(-1e-3).is_err());
        assert!(PermeabilityParams::new(f64::NAN).is_err());
    }
}
