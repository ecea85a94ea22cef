use alloc::vec;
use alloc::vec::Vec;

use super::{DofMap, SolutionState};
use crate::element::{element_matrices, tau_gls, ElementInput, ElementMatrices, GlsParams};
use crate::error::{Error, Result};
use crate::material::{PermeabilityParams, SolidModel};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Assembled Jacobian and residual (internal minus nothing: external loads are
/// subtracted by the caller).
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub residual: Vec<f64>,
}

/// Mesh, numbering and material data needed to evaluate the discrete system.
#[derive(Debug, Clone)]
pub struct Discretization<'a, S> {
    pub mesh: &'a Mesh,
    pub dofs: DofMap,
    pub solid: S,
    pub permeability: PermeabilityParams,
    pub gls_enabled: bool,
    /// Corner circumsphere radius per element, reference configuration, mm.
    pub element_size: Vec<f64>,
    template: CsrMatrix,
}

impl<'a, S: SolidModel> Discretization<'a, S> {
    pub fn new(
        mesh: &'a Mesh,
        solid: S,
        permeability: PermeabilityParams,
        gls_enabled: bool,
    ) -> Result<Self> {
        if mesh.elements.is_empty() {
            return Err(Error::Validation("mesh has no elements".into()));
        }
        let dofs = DofMap::new(mesh);
        let template = dofs.matrix_pattern(mesh);
        Ok(Self {
            mesh,
            element_size: mesh.element_sizes()?,
            dofs,
            solid,
            permeability,
            gls_enabled,
            template,
        })
    }

    /// Zero matrix with the global pattern.
    pub fn zero_matrix(&self) -> CsrMatrix {
        self.template.clone()
    }

    pub fn gls_params(&self, element: usize, dt: f64) -> Result<GlsParams> {
        if !self.gls_enabled {
            return Ok(GlsParams::disabled());
        }
        GlsParams::new(
            tau_gls(self.element_size[element], self.permeability.k, dt)?,
            true,
        )
    }

    /// Smallest and largest stabilization factor over the mesh for step `dt`
    /// (both zero when stabilization is off).
    pub fn tau_range(&self, dt: f64) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for e in 0..self.element_size.len() {
            let t = self.gls_params(e, dt)?.effective_tau();
            lo = lo.min(t);
            hi = hi.max(t);
        }
        Ok((lo, hi))
    }

    pub fn element_input(
        &self,
        e: usize,
        state: &SolutionState,
        prev: &SolutionState,
    ) -> ElementInput {
        let el = &self.mesh.elements[e];
        ElementInput {
            id: e,
            reference: self.mesh.element_nodes(e),
            displacement: core::array::from_fn(|a| state.displacement(el.nodes[a])),
            displacement_prev: core::array::from_fn(|a| prev.displacement(el.nodes[a])),
            pressure: core::array::from_fn(|a| {
                state.p[self
                    .dofs
                    .pressure_index(el.nodes[a])
                    .expect("corner carries pressure")]
            }),
        }
    }

    pub fn element_system(
        &self,
        e: usize,
        state: &SolutionState,
        prev: &SolutionState,
        dt: f64,
    ) -> Result<ElementMatrices> {
        element_matrices(
            &self.element_input(e, state, prev),
            &self.solid,
            &self.permeability,
            &self.gls_params(e, dt)?,
            dt,
        )
    }

    /// Sparse Jacobian and internal residual at `state`, with `prev` the
    /// converged state of the previous time level.
    pub fn assemble(
        &self,
        state: &SolutionState,
        prev: &SolutionState,
        dt: f64,
    ) -> Result<GlobalSystem> {
        if !(dt > 0.0) {
            return Err(Error::Config(alloc::format!(
                "time step must be positive, got {dt}"
            )));
        }
        let n = self.dofs.total();
        if state.u.len() != self.dofs.num_u()
            || state.p.len() != self.dofs.num_p()
            || prev.u.len() != state.u.len()
            || prev.p.len() != state.p.len()
        {
            return Err(Error::Validation(
                "state dimensions do not match the mesh".into(),
            ));
        }
        let mut matrix = self.zero_matrix();
        let mut residual = vec![0.0; n];
        let mut positions = [0usize; 34 * 34];
        for (e, el) in self.mesh.elements.iter().enumerate() {
            let m = self.element_system(e, state, prev, dt)?;
            let dofs = self.dofs.element_dofs(el);
            for (r, &i) in dofs.iter().enumerate() {
                for (c, &j) in dofs.iter().enumerate() {
                    positions[34 * r + c] =
                        matrix.position(i, j).expect("element dofs are coupled");
                }
            }
            let values = matrix.values_mut();
            for r in 0..34 {
                for c in 0..34 {
                    values[positions[34 * r + c]] += local_entry(&m, r, c, dt);
                }
                residual[dofs[r]] += local_residual(&m, r);
            }
        }
        Ok(GlobalSystem { matrix, residual })
    }
}

/// Entry `(r, c)` of the 34×34 element Jacobian.
#[inline]
pub(crate) fn local_entry(m: &ElementMatrices, r: usize, c: usize, dt: f64) -> f64 {
    match (r < 30, c < 30) {
        (true, true) => m.k_uu[(r, c)] + m.k_uu_gls[(r, c)],
        (true, false) => m.k_up[(r, c - 30)],
        (false, true) => m.k_up[(c, r - 30)],
        (false, false) => -dt * m.k_pp[(r - 30, c - 30)],
    }
}

/// Entry `r` of the 34-long element residual.
#[inline]
pub(crate) fn local_residual(m: &ElementMatrices, r: usize) -> f64 {
    if r < 30 {
        m.f_int_u[r] + m.f_gls_u[r]
    } else {
        -m.f_int_p[r - 30]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::NeoHookeParams;
    use crate::mesh::{generate_box, BoxSpec};

    fn setup(cells: [usize; 3]) -> Mesh {
        generate_box(&BoxSpec {
            lengths: [1.0, 1.0, 1.0],
            cells,
        })
        .unwrap()
    }

    #[test]
    fn reference_state_has_zero_residual() {
        let mesh = setup([1, 1, 1]);
        let d = Discretization::new(
            &mesh,
            NeoHookeParams::new(0.2, 0.5).unwrap(),
            PermeabilityParams::new(1e-3).unwrap(),
            true,
        )
        .unwrap();
        let s = SolutionState::zeros(&d.dofs);
        let sys = d.assemble(&s, &s, 6.4).unwrap();
        assert!(sys.residual.iter().all(|&r| r.abs() < 1e-15));
        assert!(sys.matrix.symmetry_defect() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_state() {
        let mesh = setup([1, 1, 1]);
        let d = Discretization::new(
            &mesh,
            NeoHookeParams::new(0.2, 0.5).unwrap(),
            PermeabilityParams::new(1e-3).unwrap(),
            false,
        )
        .unwrap();
        let s = SolutionState::zeros(&d.dofs);
        let mut bad = s.clone();
        bad.p.pop();
        assert!(d.assemble(&bad, &s, 1.0).is_err());
        assert!(d.assemble(&s, &s, 0.0).is_err());
    }

    #[test]
    fn tau_range_follows_element_sizes() {
        let mesh = setup([2, 1, 1]);
        let mut d = Discretization::new(
            &mesh,
            NeoHookeParams::new(0.2, 0.5).unwrap(),
            PermeabilityParams::new(0.25).unwrap(),
            false,
        )
        .unwrap();
        assert_eq!(d.tau_range(1.0).unwrap(), (0.0, 0.0));
        d.gls_enabled = true;
        let (lo, hi) = d.tau_range(1.0).unwrap();
        let hmin = d.element_size.iter().cloned().fold(f64::INFINITY, f64::min);
        let hmax = d.element_size.iter().cloned().fold(0.0, f64::max);
        assert!((lo - hmin * hmin).abs() < 1e-14 && (hi - hmax * hmax).abs() < 1e-14);
    }
}
