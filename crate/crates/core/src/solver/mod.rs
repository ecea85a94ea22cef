//! Degrees of freedom, global assembly, constraints and the Newton/backward
//! Euler driver for the coupled displacement–pressure system.
//!
//! Global unknowns are laid out in two blocks: three displacement components
//! per node (`3·node + c`), followed by one pressure per corner node. The
//! assembled Jacobian is
//!
//! ```text
//! [ K_uu + K_gls   K_up     ]
//! [ K_upᵀ         −Δt·K_pp  ]
//! ```
//!
//! which is symmetric and quasi-definite.

mod assembly;
mod dirichlet;
mod newton;

use alloc::vec;
use alloc::vec::Vec;

pub use assembly::{Discretization, GlobalSystem};
pub use dirichlet::{apply_dirichlet, Constraints};
pub use newton::{
    march, IterationInfo, Loading, NewtonSettings, Solver, StepLoads, StepReport, Trajectory,
};

use crate::mesh::{Mesh, Tet10};
use crate::sparse::CsrMatrix;

const NO_PRESSURE: usize = usize::MAX;

/// Global numbering of displacement and pressure unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    num_nodes: usize,
    pressure_index: Vec<usize>,
    pressure_nodes: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let flags = mesh.corner_flags();
        let mut pressure_index = vec![NO_PRESSURE; mesh.num_nodes()];
        let mut pressure_nodes = Vec::new();
        for (node, &corner) in flags.iter().enumerate() {
            if corner {
                pressure_index[node] = pressure_nodes.len();
                pressure_nodes.push(node);
            }
        }
        Self {
            num_nodes: mesh.num_nodes(),
            pressure_index,
            pressure_nodes,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_u(&self) -> usize {
        3 * self.num_nodes
    }

    pub fn num_p(&self) -> usize {
        self.pressure_nodes.len()
    }

    pub fn total(&self) -> usize {
        self.num_u() + self.num_p()
    }

    #[inline]
    pub fn u_dof(&self, node: usize, component: usize) -> usize {
        3 * node + component
    }

    /// Position of `node` in the pressure vector, if it carries a pressure.
    #[inline]
    pub fn pressure_index(&self, node: usize) -> Option<usize> {
        let i = self.pressure_index[node];
        (i != NO_PRESSURE).then_some(i)
    }

    #[inline]
    pub fn p_dof(&self, node: usize) -> Option<usize> {
        self.pressure_index(node).map(|i| self.num_u() + i)
    }

    /// Nodes carrying a pressure, in pressure-index order.
    pub fn pressure_nodes(&self) -> &[usize] {
        &self.pressure_nodes
    }

    /// Element dofs: 30 displacement dofs (`3a + c`) then 4 pressure dofs.
    pub fn element_dofs(&self, el: &Tet10) -> [usize; 34] {
        let mut d = [0; 34];
        for a in 0..10 {
            for c in 0..3 {
                d[3 * a + c] = self.u_dof(el.nodes[a], c);
            }
        }
        for a in 0..4 {
            d[30 + a] = self.num_u() + self.pressure_index[el.nodes[a]];
        }
        d
    }

    /// Zero matrix whose pattern couples every pair of dofs sharing an
    /// element.
    pub fn matrix_pattern(&self, mesh: &Mesh) -> CsrMatrix {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.num_nodes];
        for el in &mesh.elements {
            for &a in &el.nodes {
                adjacency[a].extend_from_slice(&el.nodes);
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        let mut rows = vec![Vec::new(); self.total()];
        for (node, adj) in adjacency.iter().enumerate() {
            let mut cols = Vec::with_capacity(4 * adj.len());
            for &b in adj {
                cols.extend((0..3).map(|c| self.u_dof(b, c)));
            }
            cols.extend(adj.iter().filter_map(|&b| self.p_dof(b)));
            for c in 0..3 {
                rows[self.u_dof(node, c)] = cols.clone();
            }
            if let Some(p) = self.p_dof(node) {
                rows[p] = cols;
            }
        }
        CsrMatrix::from_pattern(self.total(), &rows)
            .expect("node adjacency yields a sorted pattern")
    }
}

/// Nodal displacements (mm, `3·node + c`) and corner pressures (MPa, in
/// pressure-index order) at time `t` (s).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl SolutionState {
    pub fn zeros(dofs: &DofMap) -> Self {
        Self {
            u: vec![0.0; dofs.num_u()],
            p: vec![0.0; dofs.num_p()],
            t: 0.0,
        }
    }

    pub fn displacement(&self, node: usize) -> [f64; 3] {
        [self.u[3 * node], self.u[3 * node + 1], self.u[3 * node + 2]]
    }

    /// Value of global dof `dof`.
    pub fn dof(&self, dof: usize) -> f64 {
        if dof < self.u.len() {
            self.u[dof]
        } else {
            self.p[dof - self.u.len()]
        }
    }

    pub fn set_dof(&mut self, dof: usize, v: f64) {
        if dof < self.u.len() {
            self.u[dof] = v;
        } else {
            let k = dof - self.u.len();
            self.p[k] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.p).all(|v| v.is_finite())
    }

    pub fn max_abs_pressure(&self) -> f64 {
        self.p.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_box, BoxSpec};

    #[test]
    fn dof_layout_is_dense_and_disjoint() {
        let m = generate_box(&BoxSpec {
            lengths: [1.0; 3],
            cells: [1, 1, 2],
        })
        .unwrap();
        let d = DofMap::new(&m);
        assert_eq!(d.num_p(), 12);
        assert_eq!(d.total(), 3 * m.num_nodes() + 12);
        let mut seen = vec![false; d.total()];
        for node in 0..m.num_nodes() {
            for c in 0..3 {
                seen[d.u_dof(node, c)] = true;
            }
            if let Some(p) = d.p_dof(node) {
                assert!(!seen[p]);
                seen[p] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        for el in &m.elements {
            for &mid in &el.nodes[4..] {
                assert!(d.p_dof(mid).is_none());
            }
        }
    }

    #[test]
    fn pattern_is_structurally_symmetric() {
        let m = generate_box(&BoxSpec {
            lengths: [1.0; 3],
            cells: [2, 1, 1],
        })
        .unwrap();
        let d = DofMap::new(&m);
        let a = d.matrix_pattern(&m);
        assert!(a.is_structurally_symmetric());
        for el in &m.elements {
            let dofs = d.element_dofs(el);
            for &i in &dofs {
                for &j in &dofs {
                    assert!(a.position(i, j).is_some());
                }
            }
        }
    }
}
