//! TOML run configuration.
//!
//! All quantities carry fixed units that are spelled out in the key names:
//! millimetres, newtons, seconds and megapascals.

use std::fs;
use std::path::{Path, PathBuf};

use biphasic_core::material::{NeoHookeParams, PermeabilityParams};
use biphasic_core::mesh::{BoxSpec, Line, MeshSpec, QuarterCylinderSpec};
use biphasic_core::scenario::{Contact, MeshSource, SimulationConfig};
use biphasic_core::solver::NewtonSettings;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{AppError, Result};

/// Everything a `solve` run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub simulation: SimulationConfig,
    pub newton: NewtonSettings,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a VTK file every this many steps; 0 writes none.
    pub vtk_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            vtk_every: 1,
        }
    }
}

impl RunConfig {
    pub fn cartilage_default() -> Self {
        Self {
            simulation: SimulationConfig::cartilage_default(),
            newton: NewtonSettings {
                tangent_reuse: Some(0.1),
                ..NewtonSettings::default()
            },
            output: OutputConfig::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from_run(self)).expect("configuration serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()).map_err(|e| AppError::io(path, e))
    }

    /// Reads a file and applies `key=value` overrides. A relative mesh path
    /// is resolved against the directory of the file. An unreadable file is
    /// a configuration error.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, overrides)?;
        if let MeshSource::File(p) = &mut cfg.simulation.mesh {
            let base = path.parent().unwrap_or(Path::new(""));
            if Path::new(p.as_str()).is_relative() {
                *p = base.join(&*p).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| {
            AppError::Config(format!("invalid TOML: {}", e.message()))
        })?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        check_keys(&table)?;
        let file: ConfigFile = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| AppError::Config(e.message().to_string()))?;
        let cfg = file.into_run()?;
        cfg.simulation.validate()?;
        cfg.newton.validate()?;
        Ok(cfg)
    }

    /// Applies `key=value` overrides to an in-memory configuration.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::parse(&self.to_toml(), overrides)
    }
}

/// Permitted keys per section.
const SCHEMA: &[(&str, &[&str])] = &[
    (
        "mesh",
        &[
            "shape",
            "path",
            "level",
            "radius_mm",
            "height_mm",
            "nc",
            "nr",
            "nz",
            "lx_mm",
            "ly_mm",
            "lz_mm",
            "nx",
            "ny",
        ],
    ),
    ("material", &["lambda_mpa", "mu_mpa"]),
    ("fluid", &["permeability_mm4_per_Ns"]),
    ("time", &["dt_s", "rate_mm_per_s", "target_strain"]),
    ("stabilization", &["gls_enabled"]),
    ("boundary", &["contact"]),
    (
        "solver",
        &[
            "rel_tol",
            "abs_tol",
            "max_iters",
            "max_step_halvings",
            "tangent_reuse",
        ],
    ),
    ("output", &["dir", "vtk_every", "profile_line"]),
];

const UNIT_SUFFIXES: &[&str] = &[
    "_mm",
    "_m",
    "_cm",
    "_um",
    "_s",
    "_ms",
    "_min",
    "_h",
    "_mpa",
    "_pa",
    "_kpa",
    "_gpa",
    "_mm_per_s",
    "_m_per_s",
    "_um_per_s",
    "_mm4_per_Ns",
    "_m4_per_Ns",
];

fn stem(key: &str) -> &str {
    UNIT_SUFFIXES
        .iter()
        .filter(|s| key.ends_with(*s))
        .max_by_key(|s| s.len())
        .map_or(key, |s| &key[..key.len() - s.len()])
}

fn check_keys(table: &Table) -> Result<()> {
    for (section, value) in table {
        let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == section) else {
            return Err(AppError::Config(format!("unknown section `{section}`")));
        };
        let Value::Table(inner) = value else {
            return Err(AppError::Config(format!("`{section}` must be a table")));
        };
        for key in inner.keys() {
            if keys.contains(&key.as_str()) {
                continue;
            }
            let s = stem(key);
            if let Some(known) = keys.iter().find(|k| stem(k) == s) {
                return Err(AppError::Config(format!(
                    "unit mismatch: `{section}.{key}` is not accepted, use `{section}.{known}` (units are mm, N, s, MPa)"
                )));
            }
            return Err(AppError::Config(format!("unknown key `{section}.{key}`")));
        }
    }
    Ok(())
}

/// Sets a dotted key from `key=value`; the value is read as a TOML value and
/// falls back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        AppError::Config(format!(
            "override `{assignment}` is not of the form key=value"
        ))
    })?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
        return Err(AppError::Config(format!(
            "override key `{key}` must have the form section.key"
        )));
    }
    let section = table
        .entry(parts[0])
        .or_insert_with(|| Value::Table(Table::new()));
    let Value::Table(section) = section else {
        return Err(AppError::Config(format!("`{}` is not a table", parts[0])));
    };
    // an override replaces whichever alternative keys it conflicts with
    if parts[0] == "mesh" {
        let displaced: &[&str] = match parts[1] {
            "path" => &[
                "shape",
                "level",
                "radius_mm",
                "height_mm",
                "nc",
                "nr",
                "nz",
                "lx_mm",
                "ly_mm",
                "lz_mm",
                "nx",
                "ny",
            ],
            "shape" => &["path"],
            "level" => &["nc", "nr", "nz"],
            "nc" | "nr" => &["level"],
            _ => &[],
        };
        for k in displaced {
            section.remove(*k);
        }
    }
    section.insert(parts[1].to_string(), value);
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    mesh: MeshSection,
    material: MaterialSection,
    fluid: FluidSection,
    time: TimeSection,
    #[serde(default)]
    stabilization: StabilizationSection,
    #[serde(default)]
    boundary: BoundarySection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    shape: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    /// Preset resolution 1 to 4 for the quarter cylinder.
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nr: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nz: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lx_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ly_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lz_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ny: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSection {
    lambda_mpa: f64,
    mu_mpa: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluidSection {
    #[serde(rename = "permeability_mm4_per_Ns")]
    permeability: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeSection {
    dt_s: f64,
    rate_mm_per_s: f64,
    target_strain: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilizationSection {
    #[serde(default)]
    gls_enabled: bool,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySection {
    #[serde(default)]
    contact: ContactName,
}

#[derive(Debug, Default, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ContactName {
    #[default]
    Frictionless,
    Tied,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SolverSection {
    rel_tol: f64,
    abs_tol: f64,
    max_iters: usize,
    max_step_halvings: u32,
    /// 0 refactorizes every Newton iteration.
    tangent_reuse: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = RunConfig::cartilage_default().newton;
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_iters: d.max_iters,
            max_step_halvings: d.max_step_halvings,
            tangent_reuse: d.tangent_reuse.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputSection {
    dir: String,
    vtk_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile_line: Option<LineSection>,
}

impl Default for OutputSection {
    fn default() -> Self {
        let d = OutputConfig::default();
        Self {
            dir: d.dir.to_string_lossy().into_owned(),
            vtk_every: d.vtk_every,
            profile_line: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineSection {
    point_mm: [f64; 3],
    direction: [f64; 3],
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| AppError::Config(format!("missing key `mesh.{key}`")))
}

impl MeshSection {
    fn source(&self) -> Result<MeshSource> {
        match (&self.path, self.shape.as_deref()) {
            (Some(_), Some(_)) => Err(AppError::Config(
                "`mesh.path` and `mesh.shape` are mutually exclusive".into(),
            )),
            (Some(p), None) => Ok(MeshSource::File(p.clone())),
            (None, Some("quarter_cylinder")) => {
                let (radius, height) = (
                    required(self.radius_mm, "radius_mm")?,
                    required(self.height_mm, "height_mm")?,
                );
                let spec = match self.level {
                    Some(level) => {
                        if self.nc.is_some() || self.nr.is_some() || self.nz.is_some() {
                            return Err(AppError::Config(
                                "`mesh.level` excludes `mesh.nc`, `mesh.nr` and `mesh.nz`".into(),
                            ));
                        }
                        QuarterCylinderSpec::reference(level, radius, height)?
                    }
                    None => QuarterCylinderSpec {
                        radius,
                        height,
                        nc: required(self.nc, "nc")?,
                        nr: required(self.nr, "nr")?,
                        nz: required(self.nz, "nz")?,
                    },
                };
                Ok(MeshSource::Generate(MeshSpec::QuarterCylinder(spec)))
            }
            (None, Some("box")) => Ok(MeshSource::Generate(MeshSpec::Box(BoxSpec {
                lengths: [
                    required(self.lx_mm, "lx_mm")?,
                    required(self.ly_mm, "ly_mm")?,
                    required(self.lz_mm, "lz_mm")?,
                ],
                cells: [
                    required(self.nx, "nx")?,
                    required(self.ny, "ny")?,
                    required(self.nz, "nz")?,
                ],
            }))),
            (None, Some(other)) => Err(AppError::Config(format!(
                "unknown `mesh.shape` `{other}`, expected `quarter_cylinder` or `box`"
            ))),
            (None, None) => Err(AppError::Config(
                "the mesh needs either `mesh.shape` or `mesh.path`".into(),
            )),
        }
    }

    fn from_source(source: &MeshSource) -> Self {
        match source {
            MeshSource::File(p) => Self {
                path: Some(p.clone()),
                ..Self::default()
            },
            MeshSource::Generate(MeshSpec::QuarterCylinder(q)) => Self {
                shape: Some("quarter_cylinder".into()),
                radius_mm: Some(q.radius),
                height_mm: Some(q.height),
                nc: Some(q.nc),
                nr: Some(q.nr),
                nz: Some(q.nz),
                ..Self::default()
            },
            MeshSource::Generate(MeshSpec::Box(b)) => Self {
                shape: Some("box".into()),
                lx_mm: Some(b.lengths[0]),
                ly_mm: Some(b.lengths[1]),
                lz_mm: Some(b.lengths[2]),
                nx: Some(b.cells[0]),
                ny: Some(b.cells[1]),
                nz: Some(b.cells[2]),
                ..Self::default()
            },
        }
    }
}

impl ConfigFile {
    fn into_run(self) -> Result<RunConfig> {
        let simulation = SimulationConfig {
            mesh: self.mesh.source()?,
            material: NeoHookeParams {
                lambda: self.material.lambda_mpa,
                mu: self.material.mu_mpa,
            },
            permeability: PermeabilityParams {
                k: self.fluid.permeability,
            },
            dt: self.time.dt_s,
            rate: self.time.rate_mm_per_s,
            target_strain: self.time.target_strain,
            gls_enabled: self.stabilization.gls_enabled,
            contact: match self.boundary.contact {
                ContactName::Frictionless => Contact::Frictionless,
                ContactName::Tied => Contact::Tied,
            },
            reference_line: self.output.profile_line.map(|l| Line {
                point: l.point_mm,
                direction: l.direction,
            }),
        };
        let s = self.solver;
        if !(s.tangent_reuse >= 0.0 && s.tangent_reuse < 1.0) {
            return Err(AppError::Config(format!(
                "`solver.tangent_reuse` must lie in [0, 1), got {}",
                s.tangent_reuse
            )));
        }
        Ok(RunConfig {
            simulation,
            newton: NewtonSettings {
                rel_tol: s.rel_tol,
                abs_tol: s.abs_tol,
                max_iters: s.max_iters,
                max_step_halvings: s.max_step_halvings,
                tangent_reuse: (s.tangent_reuse > 0.0).then_some(s.tangent_reuse),
            },
            output: OutputConfig {
                dir: PathBuf::from(self.output.dir),
                vtk_every: self.output.vtk_every,
            },
        })
    }

    fn from_run(cfg: &RunConfig) -> Self {
        let sim = &cfg.simulation;
        Self {
            mesh: MeshSection::from_source(&sim.mesh),
            material: MaterialSection {
                lambda_mpa: sim.material.lambda,
                mu_mpa: sim.material.mu,
            },
            fluid: FluidSection {
                permeability: sim.permeability.k,
            },
            time: TimeSection {
                dt_s: sim.dt,
                rate_mm_per_s: sim.rate,
                target_strain: sim.target_strain,
            },
            stabilization: StabilizationSection {
                gls_enabled: sim.gls_enabled,
            },
            boundary: BoundarySection {
                contact: match sim.contact {
                    Contact::Frictionless => ContactName::Frictionless,
                    Contact::Tied => ContactName::Tied,
                },
            },
            solver: SolverSection {
                rel_tol: cfg.newton.rel_tol,
                abs_tol: cfg.newton.abs_tol,
                max_iters: cfg.newton.max_iters,
                max_step_halvings: cfg.newton.max_step_halvings,
                tangent_reuse: cfg.newton.tangent_reuse.unwrap_or(0.0),
            },
            output: OutputSection {
                dir: cfg.output.dir.to_string_lossy().into_owned(),
                vtk_every: cfg.output.vtk_every,
                profile_line: sim.reference_line.map(|l| LineSection {
                    point_mm: l.point,
                    direction: l.direction,
                }),
            },
        }
    }
}
