//! Per-element residuals and tangents of the u–p mixture.
//!
//! With total stress `T = σ − pI`, displacement test functions `f` and
//! pressure test functions `g`, the element contributes
//!
//! ```text
//! f_int_u = ∫_v ∇f : (σ − pI) dv
//! f_int_p = ∫_V g (J − J_prev) dV + Δt ∫_v k ∇g·∇p dv
//! f_gls_u = ∫_v div f · τ · div(u − u_prev) dv
//! ```
//!
//! The first term of `f_int_p` equals `Δt ∫_v g div v dv` under backward
//! Euler, written in the form whose u-derivative is exactly `−K_upᵀ`. The
//! global residual is `[f_int_u + f_gls_u − f_ext ; −f_int_p]`, which makes the
//! Jacobian `[[K_uu + K_gls, K_up], [K_upᵀ, −Δt K_pp]]` symmetric.
//!
//! All integrals use the 4-point rule in the current configuration.

use nalgebra::{Matrix3, Matrix6, SMatrix, SVector, Vector3};

use super::quadrature::quadrature_tet4pt;
use super::shape::{shape_tet10, shape_tet4};
use crate::error::{Error, Result};
use crate::material::{to_voigt, Kinematics, PermeabilityParams, SolidModel};

pub const ELEMENT_DOFS_U: usize = 30;
pub const ELEMENT_DOFS_P: usize = 4;

type MatUU = SMatrix<f64, 30, 30>;
type MatUP = SMatrix<f64, 30, 4>;
type MatPP = SMatrix<f64, 4, 4>;
type VecU = SVector<f64, 30>;
type VecP = SVector<f64, 4>;

/// GLS stabilization factor and switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlsParams {
    /// τ^GLS, N/mm².
    pub tau: f64,
    pub enabled: bool,
}

impl GlsParams {
    pub fn new(tau: f64, enabled: bool) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "GLS factor must be finite and >= 0, got {tau}"
            )));
        }
        Ok(Self { tau, enabled })
    }

    pub fn disabled() -> Self {
        Self {
            tau: 0.0,
            enabled: false,
        }
    }

    /// The factor actually applied.
    pub fn effective_tau(&self) -> f64 {
        if self.enabled {
            self.tau
        } else {
            0.0
        }
    }
}

/// τ = h² / (4 k Δt).
pub fn tau_gls(h: f64, k: f64, dt: f64) -> Result<f64> {
    for (name, v) in [("h", h), ("k", k), ("dt", dt)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "tau_gls: {name} must be > 0, got {v}"
            )));
        }
    }
    Ok(h * h / (4.0 * k * dt))
}

/// Nodal data of one ten-node element. Displacements are nodal vectors in the
/// element's local node order; pressures live on the four corners.
#[derive(Debug, Clone, Copy)]
pub struct ElementInput {
    pub id: usize,
    pub reference: [[f64; 3]; 10],
    pub displacement: [[f64; 3]; 10],
    pub displacement_prev: [[f64; 3]; 10],
    pub pressure: [f64; 4],
}

impl ElementInput {
    /// Element at rest in its reference configuration.
    pub fn at_rest(id: usize, reference: [[f64; 3]; 10]) -> Self {
        Self {
            id,
            reference,
            displacement: [[0.0; 3]; 10],
            displacement_prev: [[0.0; 3]; 10],
            pressure: [0.0; 4],
        }
    }
}

/// Element tangent blocks and internal force vectors. Local displacement dof
/// `3a + i` is component `i` of node `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementMatrices {
    pub k_uu: MatUU,
    pub k_up: MatUP,
    pub k_pp: MatPP,
    pub k_uu_gls: MatUU,
    pub f_int_u: VecU,
    pub f_int_p: VecP,
    pub f_gls_u: VecU,
}

impl ElementMatrices {
    fn zeros() -> Self {
        Self {
            k_uu: MatUU::zeros(),
            k_up: MatUP::zeros(),
            k_pp: MatPP::zeros(),
            k_uu_gls: MatUU::zeros(),
            f_int_u: VecU::zeros(),
            f_int_p: VecP::zeros(),
            f_gls_u: VecU::zeros(),
        }
    }
}

/// Strain–displacement matrix (6×30, engineering shear) from spatial shape
/// function gradients.
pub fn b_matrix(grads: &[Vector3<f64>; 10]) -> SMatrix<f64, 6, 30> {
    let mut b = SMatrix::<f64, 6, 30>::zeros();
    for (a, g) in grads.iter().enumerate() {
        let c = 3 * a;
        b[(0, c)] = g.x;
        b[(1, c + 1)] = g.y;
        b[(2, c + 2)] = g.z;
        b[(3, c)] = g.y;
        b[(3, c + 1)] = g.x;
        b[(4, c + 1)] = g.z;
        b[(4, c + 2)] = g.y;
        b[(5, c)] = g.z;
        b[(5, c + 2)] = g.x;
    }
    b
}

fn gradient_of(nodes: &[[f64; 3]; 10], dn: &[[f64; 3]; 10]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for (x, g) in nodes.iter().zip(dn) {
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += x[i] * g[j];
            }
        }
    }
    m
}

/// Evaluates all element blocks at the current iterate.
///
/// `dt` enters the Darcy part of `f_int_p`; `gls` weights the least-squares
/// term (zero when disabled).
pub fn element_matrices(
    input: &ElementInput,
    solid: &impl SolidModel,
    perm: &PermeabilityParams,
    gls: &GlsParams,
    dt: f64,
) -> Result<ElementMatrices> {
    let rule = quadrature_tet4pt();
    let tau = gls.effective_tau();
    let k = perm.k;
    let mut out = ElementMatrices::zeros();

    let mut current = input.reference;
    let mut previous = input.reference;
    for a in 0..10 {
        for i in 0..3 {
            current[a][i] += input.displacement[a][i];
            previous[a][i] += input.displacement_prev[a][i];
        }
    }
    let mut du = VecU::zeros();
    for a in 0..10 {
        for i in 0..3 {
            du[3 * a + i] = input.displacement[a][i] - input.displacement_prev[a][i];
        }
    }
    let p_nodal = VecP::from_column_slice(&input.pressure);

    for (qp, (xi, w)) in rule.points.iter().zip(rule.weights).enumerate() {
        let s10 = shape_tet10(*xi);
        let s4 = shape_tet4(*xi);

        let j0 = gradient_of(&input.reference, &s10.gradients);
        let det0 = j0.determinant();
        if !(det0 > 0.0) {
            return Err(Error::Geometry(alloc::format!(
                "element {} has non-positive reference Jacobian {det0:e} at quadrature point {qp}",
                input.id
            )));
        }
        let j0_inv_t = j0
            .try_inverse()
            .ok_or_else(|| Error::Geometry(alloc::format!("singular element {}", input.id)))?
            .transpose();

        // ∂x/∂ξ and ∂x_prev/∂ξ; F = (∂x/∂ξ)(∂X/∂ξ)⁻¹
        let jc = gradient_of(&current, &s10.gradients);
        let f = jc * j0_inv_t.transpose();
        let kin = Kinematics::new(f).map_err(|_| Error::InvertedElement {
            element: input.id,
            qp,
            jacobian: f.determinant(),
        })?;
        let j_prev = (gradient_of(&previous, &s10.gradients) * j0_inv_t.transpose()).determinant();
        let jc_inv_t = jc
            .try_inverse()
            .ok_or(Error::InvertedElement {
                element: input.id,
                qp,
                jacobian: kin.j,
            })?
            .transpose();

        let dv_ref = det0 * w;
        let dv = kin.j * dv_ref;

        let grads: [Vector3<f64>; 10] =
            core::array::from_fn(|a| jc_inv_t * Vector3::from_column_slice(&s10.gradients[a]));
        let grads_p: [Vector3<f64>; 4] =
            core::array::from_fn(|b| jc_inv_t * Vector3::from_column_slice(&s4.gradients[b]));
        let n_p = VecP::from_column_slice(&s4.values);
        let p = n_p.dot(&p_nodal);

        let b = b_matrix(&grads);
        let b_div = VecU::from_fn(|r, _| grads[r / 3][r % 3]);

        let sigma = solid.cauchy_stress(&kin);
        let mut d = solid.spatial_tangent(&kin);
        // pressure part of the Kirchhoff tangent: p(2𝕀ˢʸᵐ − I⊗I)
        let mut c_p = Matrix6::zeros();
        for i in 0..3 {
            for jj in 0..3 {
                c_p[(i, jj)] = -p;
            }
            c_p[(i, i)] += 2.0 * p;
            c_p[(i + 3, i + 3)] = p;
        }
        d += c_p;
        let total = sigma - Matrix3::identity() * p;

        // material + geometric stiffness
        out.k_uu += b.transpose() * d * b * dv;
        for a in 0..10 {
            let ta = total * grads[a];
            for bb in 0..10 {
                let g = ta.dot(&grads[bb]) * dv;
                for i in 0..3 {
                    out.k_uu[(3 * a + i, 3 * bb + i)] += g;
                }
            }
        }

        out.f_int_u += b.transpose() * to_voigt(&sigma) * dv - b_div * (p * dv);
        out.k_up -= b_div * n_p.transpose() * dv;

        let mut grad_p = Vector3::zeros();
        for bb in 0..4 {
            grad_p += grads_p[bb] * input.pressure[bb];
        }
        for a in 0..4 {
            for bb in 0..4 {
                out.k_pp[(a, bb)] += k * grads_p[a].dot(&grads_p[bb]) * dv;
            }
            out.f_int_p[a] +=
                n_p[a] * (kin.j - j_prev) * dv_ref + dt * k * grads_p[a].dot(&grad_p) * dv;
        }

        if tau != 0.0 {
            out.k_uu_gls += b_div * b_div.transpose() * (tau * dv);
            out.f_gls_u += b_div * (tau * b_div.dot(&du) * dv);
        }
    }
    Ok(out)
}
