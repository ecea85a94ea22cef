//! Pressure profiles, oscillation measures and derived fields.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};

use crate::element::{quadrature_tet4pt, shape_tet10, shape_tet4, TET10_EDGES};
use crate::error::{Error, Result};
use crate::material::PermeabilityParams;
use crate::mesh::{Line, Mesh};
use crate::solver::{DofMap, SolutionState};

/// Nodal pressures ordered by position along a line.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureProfile {
    /// `(coordinate along the line in mm, pressure in MPa)`
    pub points: Vec<(f64, f64)>,
}

impl PressureProfile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Query("a profile needs at least two points".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Query(
                "profile coordinates must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pressures(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Largest pressure on the profile.
    pub fn peak(&self) -> f64 {
        self.pressures().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pressure-carrying nodes within `tol` of `line`, in order along it.
pub fn profile_nodes(mesh: &Mesh, dofs: &DofMap, line: &Line, tol: f64) -> Result<Vec<usize>> {
    let nodes: Vec<usize> = mesh
        .reference_line_nodes(line, tol)?
        .into_iter()
        .filter(|&n| dofs.pressure_index(n).is_some())
        .collect();
    if nodes.len() < 2 {
        return Err(Error::Query(
            "fewer than two pressure nodes on the line".into(),
        ));
    }
    Ok(nodes)
}

/// Pressures at `nodes`, positioned by their reference coordinate along
/// `line`.
pub fn extract_profile(
    mesh: &Mesh,
    dofs: &DofMap,
    state: &SolutionState,
    line: &Line,
    nodes: &[usize],
) -> Result<PressureProfile> {
    if nodes.is_empty() {
        return Err(Error::Query("no nodes to extract a profile from".into()));
    }
    let points = nodes
        .iter()
        .map(|&n| {
            let i = dofs
                .pressure_index(n)
                .ok_or_else(|| Error::Query(format!("node {n} carries no pressure")))?;
            Ok((mesh.line_coordinate(line, n), state.p[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    PressureProfile::new(points)
}

/// Oscillation of a profile relative to its plateau, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationReport {
    /// MPa
    pub plateau_pressure: f64,
    pub overshoot_pct: f64,
    pub undershoot_pct: f64,
    pub max_deviation_pct: f64,
}

fn middle_index(profile: &PressureProfile) -> (usize, Option<usize>) {
    let (first, last) = (profile.points[0].0, profile.points[profile.len() - 1].0);
    let mid = 0.5 * (first + last);
    let mut best = 0;
    for (i, p) in profile.points.iter().enumerate() {
        if (p.0 - mid).abs() < (profile.points[best].0 - mid).abs() {
            best = i;
        }
    }
    let d = (profile.points[best].0 - mid).abs();
    let tie = (best + 1 < profile.len())
        .then_some(best + 1)
        .filter(|&j| ((profile.points[j].0 - mid).abs() - d).abs() <= 1e-9 * (last - first));
    (best, tie)
}

/// Plateau is the pressure at the node nearest mid-length (the mean of the
/// two nearest when they are equidistant).
pub fn oscillation_metric(profile: &PressureProfile) -> Result<OscillationReport> {
    if profile.len() < 5 {
        return Err(Error::MetricUndefined(format!(
            "profile has {} points, at least 5 are needed",
            profile.len()
        )));
    }
    let (i, tie) = middle_index(profile);
    let plateau = match tie {
        Some(j) => 0.5 * (profile.points[i].1 + profile.points[j].1),
        None => profile.points[i].1,
    };
    oscillation_metric_with_plateau(profile, plateau)
}

/// Overshoot is the excess of the maximum over `plateau`. Undershoot is the
/// deepest dip below the running maximum (capped at the plateau) met while
/// walking from either end towards the middle, so a profile that rises
/// monotonically to its plateau scores zero on both.
pub fn oscillation_metric_with_plateau(
    profile: &PressureProfile,
    plateau: f64,
) -> Result<OscillationReport> {
    if profile.len() < 5 {
        return Err(Error::MetricUndefined(format!(
            "profile has {} points, at least 5 are needed",
            profile.len()
        )));
    }
    if !(plateau > 0.0) {
        return Err(Error::MetricUndefined(format!(
            "plateau pressure {plateau:e} MPa is not positive"
        )));
    }
    let p: Vec<f64> = profile.pressures().collect();
    let over = (profile.peak() - plateau).max(0.0);
    let (mid, _) = middle_index(profile);
    let dip = |seq: &mut dyn Iterator<Item = f64>| {
        let mut running = f64::NEG_INFINITY;
        let mut worst: f64 = 0.0;
        for v in seq {
            if running.is_finite() {
                worst = worst.max(running.min(plateau) - v);
            }
            running = running.max(v);
        }
        worst
    };
    let under = dip(&mut p[..=mid].iter().copied()).max(dip(&mut p[mid..].iter().rev().copied()));
    let overshoot_pct = 100.0 * over / plateau;
    let undershoot_pct = 100.0 * under / plateau;
    Ok(OscillationReport {
        plateau_pressure: plateau,
        overshoot_pct,
        undershoot_pct,
        max_deviation_pct: overshoot_pct.max(undershoot_pct),
    })
}

/// Pressure at every node: corner values, midside nodes averaged from their
/// edge ends.
pub fn nodal_pressures(mesh: &Mesh, dofs: &DofMap, state: &SolutionState) -> Vec<f64> {
    let mut out = vec![0.0; mesh.num_nodes()];
    for (n, v) in out.iter_mut().enumerate() {
        if let Some(i) = dofs.pressure_index(n) {
            *v = state.p[i];
        }
    }
    for el in &mesh.elements {
        for (e, &(a, b)) in TET10_EDGES.iter().enumerate() {
            out[el.nodes[4 + e]] = 0.5 * (out[el.nodes[a]] + out[el.nodes[b]]);
        }
    }
    out
}

/// Volume-averaged Darcy velocity `w = −k ∇p` per element, evaluated on the
/// current configuration, mm/s.
pub fn seepage_velocity(
    mesh: &Mesh,
    dofs: &DofMap,
    state: &SolutionState,
    perm: &PermeabilityParams,
) -> Result<Vec<[f64; 3]>> {
    let rule = quadrature_tet4pt();
    let mut out = Vec::with_capacity(mesh.elements.len());
    for (e, el) in mesh.elements.iter().enumerate() {
        let mut x = mesh.element_nodes(e);
        for (a, xa) in x.iter_mut().enumerate() {
            let u = state.displacement(el.nodes[a]);
            for d in 0..3 {
                xa[d] += u[d];
            }
        }
        let p: [f64; 4] =
            core::array::from_fn(|a| dofs.pressure_index(el.nodes[a]).map_or(0.0, |i| state.p[i]));
        let mut w = Vector3::zeros();
        let mut vol = 0.0;
        for (xi, wt) in rule.points.iter().zip(rule.weights) {
            let s10 = shape_tet10(*xi);
            let s4 = shape_tet4(*xi);
            let mut j = Matrix3::zeros();
            for (xa, g) in x.iter().zip(&s10.gradients) {
                j += Vector3::from_column_slice(xa) * Vector3::from_column_slice(g).transpose();
            }
            let det = j.determinant();
            let inv_t = j
                .try_inverse()
                .ok_or(Error::InvertedElement {
                    element: e,
                    qp: 0,
                    jacobian: det,
                })?
                .transpose();
            let mut grad = Vector3::zeros();
            for (pa, g) in p.iter().zip(&s4.gradients) {
                grad += inv_t * Vector3::from_column_slice(g) * *pa;
            }
            w -= grad * (perm.k * det * wt);
            vol += det * wt;
        }
        w /= vol;
        out.push([w.x, w.y, w.z]);
    }
    Ok(out)
}
