//! Result files: legacy VTK snapshots, pressure profiles and run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use biphasic_core::material::PermeabilityParams;
use biphasic_core::mesh::Mesh;
use biphasic_core::postprocess::{
    nodal_pressures, seepage_velocity, OscillationReport, PressureProfile,
};
use biphasic_core::solver::{DofMap, SolutionState};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// VTK cell type of the quadratic tetrahedron.
pub const VTK_QUADRATIC_TETRA: u8 = 24;

/// Legacy ASCII unstructured grid. VTK numbers the edges of a quadratic
/// tetrahedron (0,1) (1,2) (2,0) (0,3) (1,3) (2,3), like the mesh, so the
/// connectivity is written unchanged.
pub fn format_vtk(
    mesh: &Mesh,
    dofs: &DofMap,
    state: &SolutionState,
    perm: &PermeabilityParams,
) -> Result<String> {
    let n = mesh.num_nodes();
    let ne = mesh.elements.len();
    let mut s = String::with_capacity(64 * (n + ne));
    let _ = writeln!(s, "# vtk DataFile Version 4.2");
    let _ = writeln!(s, "biphasic state t = {:e} s", state.t);
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {n} double");
    for v in &mesh.vertices {
        let [x, y, z] = v.coords;
        let _ = writeln!(s, "{x:?} {y:?} {z:?}");
    }
    let _ = writeln!(s, "CELLS {ne} {}", 11 * ne);
    for el in &mesh.elements {
        let _ = write!(s, "10");
        for node in el.nodes {
            let _ = write!(s, " {node}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{VTK_QUADRATIC_TETRA}");
    }

    let _ = writeln!(s, "POINT_DATA {n}");
    let _ = writeln!(s, "VECTORS displacement double");
    for node in 0..n {
        let [x, y, z] = state.displacement(node);
        let _ = writeln!(s, "{x:?} {y:?} {z:?}");
    }
    let _ = writeln!(s, "SCALARS pressure double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for p in nodal_pressures(mesh, dofs, state) {
        let _ = writeln!(s, "{p:?}");
    }

    let _ = writeln!(s, "CELL_DATA {ne}");
    let _ = writeln!(s, "VECTORS seepage_velocity double");
    for [x, y, z] in seepage_velocity(mesh, dofs, state, perm)? {
        let _ = writeln!(s, "{x:?} {y:?} {z:?}");
    }
    Ok(s)
}

pub fn write_vtk(
    path: &Path,
    mesh: &Mesh,
    dofs: &DofMap,
    state: &SolutionState,
    perm: &PermeabilityParams,
) -> Result<()> {
    fs::write(path, format_vtk(mesh, dofs, state, perm)?).map_err(|e| AppError::io(path, e))
}

/// One profile sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub z_mm: f64,
    pub p_mpa: f64,
    pub step: usize,
    pub time_s: f64,
}

/// Flattens profiles recorded at `(step, time)` into rows.
pub fn profile_rows<'a>(
    profiles: impl IntoIterator<Item = (usize, f64, &'a PressureProfile)>,
) -> Vec<ProfileRow> {
    profiles
        .into_iter()
        .flat_map(|(step, time_s, prof)| {
            prof.points.iter().map(move |&(z_mm, p_mpa)| ProfileRow {
                z_mm,
                p_mpa,
                step,
                time_s,
            })
        })
        .collect()
}

/// CSV with header `z_mm,p_mpa,step,time_s`; reals carry 17 significant
/// digits.
pub fn write_profile_csv(path: &Path, rows: &[ProfileRow]) -> Result<()> {
    let io = |e: csv::Error| AppError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["z_mm", "p_mpa", "step", "time_s"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.z_mm),
            format!("{:.16e}", r.p_mpa),
            r.step.to_string(),
            format!("{:.16e}", r.time_s),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<ProfileRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AppError::io(path, e.into()))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| AppError::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub plateau_pressure_mpa: f64,
    pub overshoot_pct: f64,
    pub undershoot_pct: f64,
    pub max_deviation_pct: f64,
}

impl From<OscillationReport> for MetricSummary {
    fn from(r: OscillationReport) -> Self {
        Self {
            plateau_pressure_mpa: r.plateau_pressure,
            overshoot_pct: r.overshoot_pct,
            undershoot_pct: r.undershoot_pct,
            max_deviation_pct: r.max_deviation_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonSummary {
    pub total_iterations: usize,
    /// Per step.
    pub iterations: Vec<usize>,
    pub factorizations: Vec<usize>,
    pub substeps: Vec<usize>,
}

/// Contents of `summary.txt` (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub gls_enabled: bool,
    /// Stabilization factor over the elements for the nominal step, N/mm².
    pub tau_min: f64,
    pub tau_max: f64,
    pub nodes: usize,
    pub elements: usize,
    pub steps: usize,
    pub final_time_s: f64,
    /// Largest pressure on the final reference-line profile.
    pub peak_pressure_mpa: f64,
    /// Oscillation metric of the final profile, absent when undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_error: Option<String>,
    pub newton: NewtonSummary,
    /// The configuration that produced the run.
    pub config: toml::Table,
}

impl RunSummary {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()).map_err(|e| AppError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        toml::from_str(&text).map_err(|e| AppError::Parse {
            path: path.to_path_buf(),
            line: e
                .span()
                .map_or(1, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })
    }
}
