//! Independent references: the consolidation series, finite-difference checks
//! of a solid model and a dense brute-force assembly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::{element_matrices, tau_gls, ElementInput, GlsParams};
use crate::error::{Error, Result};
use crate::material::{Kinematics, PermeabilityParams, SolidModel, VOIGT_PAIRS};
use crate::math::{cbrt, exp, sin};
use crate::mesh::{circumsphere_radius, Mesh};

/// One-dimensional consolidation of a column drained at `z = H` and sealed
/// at `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerzaghiParams {
    /// mm
    pub height: f64,
    /// MPa
    pub sigma0: f64,
    /// Constrained modulus λ + 2μ, MPa.
    pub modulus: f64,
    /// mm⁴ N⁻¹ s⁻¹
    pub k: f64,
    /// Number of (odd) series terms.
    pub n_terms: usize,
}

impl TerzaghiParams {
    pub fn new(height: f64, sigma0: f64, modulus: f64, k: f64, n_terms: usize) -> Result<Self> {
        if !(height > 0.0 && sigma0 > 0.0 && modulus > 0.0 && k > 0.0) {
            return Err(Error::Config(
                "consolidation parameters must be positive".into(),
            ));
        }
        if n_terms < 10 {
            return Err(Error::Config(format!(
                "need at least 10 series terms, got {n_terms}"
            )));
        }
        Ok(Self {
            height,
            sigma0,
            modulus,
            k,
            n_terms,
        })
    }

    /// Consolidation coefficient c_v = k M, mm²/s.
    pub fn cv(&self) -> f64 {
        self.k * self.modulus
    }

    fn decay(&self, m: f64, t: f64) -> f64 {
        let a = m * PI / (2.0 * self.height);
        exp(-a * a * self.cv() * t)
    }
}

/// Excess pore pressure at height `z` and time `t > 0`.
pub fn terzaghi_pressure(z: f64, t: f64, prm: &TerzaghiParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("series needs t > 0, got {t}")));
    }
    if !(-1e-12..=prm.height * (1.0 + 1e-12)).contains(&z) {
        return Err(Error::Config(format!(
            "z = {z} outside [0, {}]",
            prm.height
        )));
    }
    let h = prm.height;
    let mut sum = 0.0;
    for i in 0..prm.n_terms {
        let m = (2 * i + 1) as f64;
        sum += sin(m * PI * (h - z) / (2.0 * h)) * prm.decay(m, t) / m;
    }
    Ok(4.0 * prm.sigma0 / PI * sum)
}

/// Bound on the magnitude of the first omitted series term.
pub fn terzaghi_tail_bound(t: f64, prm: &TerzaghiParams) -> f64 {
    let m = (2 * prm.n_terms + 1) as f64;
    4.0 * prm.sigma0 / PI * prm.decay(m, t) / m
}

/// Average degree of consolidation U(t) ∈ [0, 1].
pub fn terzaghi_average_consolidation(t: f64, prm: &TerzaghiParams) -> f64 {
    let mut sum = 0.0;
    for i in 0..prm.n_terms {
        let m = (2 * i + 1) as f64;
        sum += 8.0 / (m * m * PI * PI) * prm.decay(m, t);
    }
    1.0 - sum
}

/// Time at which the average degree of consolidation reaches `u` (bisection).
pub fn terzaghi_time_for_consolidation(u: f64, prm: &TerzaghiParams) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Config(format!(
            "degree of consolidation must lie in (0, 1), got {u}"
        )));
    }
    let scale = prm.height * prm.height / prm.cv();
    let (mut lo, mut hi) = (1e-12 * scale, 10.0 * scale);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if terzaghi_average_consolidation(mid, prm) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn frob(m: &Matrix3<f64>) -> f64 {
    m.norm()
}

/// Random deformation gradient with J drawn uniformly from `j_range`.
pub fn random_deformation(rng: &mut ChaCha8Rng, j_range: (f64, f64)) -> Matrix3<f64> {
    let mut f = Matrix3::from_fn(|i, j| {
        let off: f64 = rng.gen_range(-0.25..0.25);
        if i == j {
            1.0 + off
        } else {
            off
        }
    });
    let target: f64 = rng.gen_range(j_range.0..j_range.1);
    let det = f.determinant();
    if det <= 0.0 {
        f = Matrix3::identity();
    }
    f * cbrt(target / f.determinant())
}

/// Central-difference first Piola stress ∂Φ/∂F with absolute step `h`.
pub fn fd_piola(model: &impl SolidModel, f: &Matrix3<f64>, h: f64) -> Result<Matrix3<f64>> {
    let mut p = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut fp = *f;
            let mut fm = *f;
            fp[(i, j)] += h;
            fm[(i, j)] -= h;
            let ep = model.strain_energy(&Kinematics::new(fp)?);
            let em = model.strain_energy(&Kinematics::new(fm)?);
            p[(i, j)] = (ep - em) / (2.0 * h);
        }
    }
    Ok(p)
}

/// Relative error of the Cauchy stress against the pushed-forward
/// finite-difference Piola stress at one state.
pub fn stress_fd_error(model: &impl SolidModel, f: &Matrix3<f64>, h: f64) -> Result<f64> {
    let kin = Kinematics::new(*f)?;
    let sigma = model.cauchy_stress(&kin);
    let sigma_fd = fd_piola(model, f, h)? * f.transpose() / kin.j;
    let scale = frob(&sigma).max(1e-12);
    Ok(frob(&(sigma - sigma_fd)) / scale)
}

/// Relative error of the spatial tangent against directional differences of
/// the Kirchhoff stress under superposed deformations `(I + εG)F`.
pub fn tangent_fd_error(model: &impl SolidModel, f: &Matrix3<f64>, h: f64) -> Result<f64> {
    let kin = Kinematics::new(*f)?;
    let c = model.spatial_tangent(&kin);
    let kirchhoff = |g: &Matrix3<f64>, eps: f64| -> Result<Matrix3<f64>> {
        let k = Kinematics::new((Matrix3::identity() + g * eps) * f)?;
        Ok(model.cauchy_stress(&k) * k.j)
    };
    let tau = model.cauchy_stress(&kin) * kin.j;
    let mut c_fd = Matrix6::zeros();
    for (col, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
        let mut g = Matrix3::zeros();
        if k == l {
            g[(k, k)] = 1.0;
        } else {
            g[(k, l)] = 0.5;
            g[(l, k)] = 0.5;
        }
        let d_tau = (kirchhoff(&g, h)? - kirchhoff(&g, -h)?) / (2.0 * h);
        let lie = (d_tau - g * tau - tau * g.transpose()) / kin.j;
        for (row, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
            c_fd[(row, col)] = lie[(i, j)];
        }
    }
    Ok((c - c_fd).norm() / c.norm().max(1e-12))
}

/// Worst stress error over `trials` random states with J in `[0.7, 1.4]`.
pub fn fd_check_stress(model: &impl SolidModel, trials: usize, seed: u64) -> Result<f64> {
    fd_check_stress_with_step(model, trials, seed, 1e-6)
}

pub fn fd_check_stress_with_step(
    model: &impl SolidModel,
    trials: usize,
    seed: u64,
    h: f64,
) -> Result<f64> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_deformation(&mut rng, (0.7, 1.4));
        worst = worst.max(stress_fd_error(model, &f, h)?);
    }
    Ok(worst)
}

/// Worst tangent error over `trials` random states with J in `[0.7, 1.4]`.
pub fn fd_check_tangent(model: &impl SolidModel, trials: usize, seed: u64) -> Result<f64> {
    check_trials(trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_deformation(&mut rng, (0.7, 1.4));
        worst = worst.max(tangent_fd_error(model, &f, 1e-5)?);
    }
    Ok(worst)
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::Config("at least one trial is required".into()))
    } else {
        Ok(())
    }
}

/// Largest dense system the brute-force oracle will build.
pub const DENSE_ORACLE_MAX_DOFS: usize = 200;

/// Row-major dense Jacobian and residual built entry by entry from element
/// matrices, with its own dof numbering: `3·node + c` for displacements, then
/// corner nodes in increasing id order for pressures.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSystem {
    pub n: usize,
    pub matrix: Vec<f64>,
    pub residual: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn dense_assembly_oracle(
    mesh: &Mesh,
    u: &[f64],
    u_prev: &[f64],
    p_corner: &[f64],
    model: &impl SolidModel,
    perm: &PermeabilityParams,
    gls_enabled: bool,
    dt: f64,
) -> Result<DenseSystem> {
    let nn = mesh.num_nodes();
    let mut p_index = vec![None; nn];
    let mut np = 0;
    for el in &mesh.elements {
        for &c in &el.nodes[..4] {
            if p_index[c].is_none() {
                p_index[c] = Some(0);
            }
        }
    }
    for slot in p_index.iter_mut().flatten() {
        *slot = np;
        np += 1;
    }
    let n = 3 * nn + np;
    if n > DENSE_ORACLE_MAX_DOFS {
        return Err(Error::Refused(format!(
            "dense oracle limited to {DENSE_ORACLE_MAX_DOFS} dofs, mesh has {n}"
        )));
    }
    if u.len() != 3 * nn || u_prev.len() != 3 * nn || p_corner.len() != np {
        return Err(Error::Validation(
            "oracle state has wrong dimensions".into(),
        ));
    }
    let mut matrix = vec![0.0; n * n];
    let mut residual = vec![0.0; n];
    for (e, el) in mesh.elements.iter().enumerate() {
        let input = ElementInput {
            id: e,
            reference: mesh.element_nodes(e),
            displacement: core::array::from_fn(|a| {
                let b = 3 * el.nodes[a];
                [u[b], u[b + 1], u[b + 2]]
            }),
            displacement_prev: core::array::from_fn(|a| {
                let b = 3 * el.nodes[a];
                [u_prev[b], u_prev[b + 1], u_prev[b + 2]]
            }),
            pressure: core::array::from_fn(|a| p_corner[p_index[el.nodes[a]].unwrap_or(0)]),
        };
        let gls = if gls_enabled {
            let h = circumsphere_radius(&mesh.element_corners(e))?;
            GlsParams::new(tau_gls(h, perm.k, dt)?, true)?
        } else {
            GlsParams::disabled()
        };
        let m = element_matrices(&input, model, perm, &gls, dt)?;
        let mut g = [0usize; 34];
        for a in 0..10 {
            for c in 0..3 {
                g[3 * a + c] = 3 * el.nodes[a] + c;
            }
        }
        for a in 0..4 {
            g[30 + a] = 3 * nn + p_index[el.nodes[a]].unwrap_or(0);
        }
        for r in 0..30 {
            for c in 0..30 {
                matrix[g[r] * n + g[c]] += m.k_uu[(r, c)] + m.k_uu_gls[(r, c)];
            }
            for b in 0..4 {
                matrix[g[r] * n + g[30 + b]] += m.k_up[(r, b)];
                matrix[g[30 + b] * n + g[r]] += m.k_up[(r, b)];
            }
            residual[g[r]] += m.f_int_u[r] + m.f_gls_u[r];
        }
        for a in 0..4 {
            for b in 0..4 {
                matrix[g[30 + a] * n + g[30 + b]] -= dt * m.k_pp[(a, b)];
            }
            residual[g[30 + a]] -= m.f_int_p[a];
        }
    }
    Ok(DenseSystem {
        n,
        matrix,
        residual,
    })
}
