//! Boundary conditions, loading programs and the two standard experiments:
//! unconfined compression of a cylinder and the one-dimensional consolidation
//! column.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::element::{quadrature_tri3pt, shape_tri6};
use crate::error::{Error, Result};
use crate::linsolve::LinearSolver;
use crate::material::{NeoHookeParams, PermeabilityParams};
use crate::math::sqrt;
use crate::mesh::{generate_box, BoxSpec, Line, Mesh, MeshSpec, QuarterCylinderSpec};
use crate::solver::{
    march, Constraints, Discretization, DofMap, IterationInfo, Loading, NewtonSettings,
    SolutionState, Solver, StepLoads, Trajectory,
};

/// Scalar function of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Program {
    Constant(f64),
    /// `rate · t`
    Ramp {
        rate: f64,
    },
    /// Zero at `t = 0`, `value` afterwards.
    Step(f64),
}

impl Program {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Program::Constant(v) => v,
            Program::Ramp { rate } => rate * t,
            Program::Step(v) => {
                if t > 0.0 {
                    v
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// Displacement component 0, 1 or 2.
    Displacement(usize),
    Pressure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBc {
    pub set: String,
    pub field: Field,
    pub program: Program,
}

/// Dead-load traction on a facet set: `direction · program(t)` in MPa per
/// unit reference area.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionBc {
    pub set: String,
    pub direction: [f64; 3],
    pub program: Program,
}

/// Essential and natural boundary data. Boundaries not mentioned are
/// traction free and impermeable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryConditionSet {
    pub dirichlet: Vec<DirichletBc>,
    pub tractions: Vec<TractionBc>,
}

impl BoundaryConditionSet {
    pub fn fix(&mut self, set: &str, field: Field, program: Program) {
        self.dirichlet.push(DirichletBc {
            set: set.into(),
            field,
            program,
        });
    }

    /// Binds the conditions to global dofs.
    pub fn resolve(&self, mesh: &Mesh, dofs: &DofMap) -> Result<ResolvedLoading> {
        let mut fixed = Vec::new();
        for bc in &self.dirichlet {
            match bc.field {
                Field::Displacement(c) => {
                    if c > 2 {
                        return Err(Error::Config(format!(
                            "displacement component {c} out of range"
                        )));
                    }
                    for n in mesh.facet_set_nodes(&bc.set)? {
                        fixed.push((dofs.u_dof(n, c), bc.program));
                    }
                }
                Field::Pressure => {
                    for n in mesh.facet_set_corner_nodes(&bc.set)? {
                        let d = dofs.p_dof(n).ok_or_else(|| {
                            Error::Validation(format!(
                                "node {n} of '{}' carries no pressure",
                                bc.set
                            ))
                        })?;
                        fixed.push((d, bc.program));
                    }
                }
            }
        }
        let mut forces = Vec::new();
        for tr in &self.tractions {
            forces.push((
                traction_load(mesh, dofs, &tr.set, tr.direction)?,
                tr.program,
            ));
        }
        let resolved = ResolvedLoading {
            total: dofs.total(),
            fixed,
            forces,
        };
        // programs that disagree anywhere on [0, 1] s conflict
        for t in [0.0, 0.5, 1.0] {
            resolved.at(t)?;
        }
        Ok(resolved)
    }
}

/// Consistent nodal forces of a unit-program traction on a facet set.
fn traction_load(mesh: &Mesh, dofs: &DofMap, set: &str, direction: [f64; 3]) -> Result<Vec<f64>> {
    let rule = quadrature_tri3pt();
    let mut f = vec![0.0; dofs.total()];
    for facet in mesh.facet_set(set)? {
        let x = facet.map(|n| mesh.coords(n));
        for (st, w) in rule.points.iter().zip(rule.weights) {
            let s = shape_tri6(*st);
            let mut ds = [0.0; 3];
            let mut dt = [0.0; 3];
            for a in 0..6 {
                for d in 0..3 {
                    ds[d] += x[a][d] * s.gradients[a][0];
                    dt[d] += x[a][d] * s.gradients[a][1];
                }
            }
            let n = [
                ds[1] * dt[2] - ds[2] * dt[1],
                ds[2] * dt[0] - ds[0] * dt[2],
                ds[0] * dt[1] - ds[1] * dt[0],
            ];
            let da = sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) * w;
            for a in 0..6 {
                for c in 0..3 {
                    f[dofs.u_dof(facet[a], c)] += s.values[a] * direction[c] * da;
                }
            }
        }
    }
    Ok(f)
}

/// Boundary conditions bound to dofs; evaluates to [`StepLoads`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLoading {
    total: usize,
    fixed: Vec<(usize, Program)>,
    forces: Vec<(Vec<f64>, Program)>,
}

impl ResolvedLoading {
    /// Constrained dofs (with repetitions collapsed).
    pub fn constrained_dofs(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.fixed.iter().map(|f| f.0).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

impl Loading for ResolvedLoading {
    fn at(&self, t: f64) -> Result<StepLoads> {
        let prescribed = Constraints::from_pairs(self.fixed.iter().map(|(d, p)| (*d, p.value(t))))?;
        let mut external = Vec::new();
        for (f, program) in &self.forces {
            let v = program.value(t);
            if external.is_empty() {
                external = vec![0.0; self.total];
            }
            for (e, fi) in external.iter_mut().zip(f) {
                *e += v * fi;
            }
        }
        Ok(StepLoads {
            prescribed,
            external,
        })
    }
}

/// Tangential condition on the loaded faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Contact {
    /// Only the normal displacement is prescribed.
    #[default]
    Frictionless,
    /// All displacement components are prescribed.
    Tied,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generate(MeshSpec),
    File(String),
}

/// Physical and numerical parameters of a compression run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub mesh: MeshSource,
    pub material: NeoHookeParams,
    pub permeability: PermeabilityParams,
    /// s
    pub dt: f64,
    /// Platen speed, mm/s.
    pub rate: f64,
    /// Final compressive strain (fraction of the height).
    pub target_strain: f64,
    pub gls_enabled: bool,
    pub contact: Contact,
    /// Line along which pressure profiles are sampled; `None` means the
    /// vertical line through the origin.
    pub reference_line: Option<Line>,
}

impl SimulationConfig {
    /// Cartilage-like sample: 18 mm radius, 8 mm thick, λ = 0.2 MPa,
    /// μ = 0.5 MPa, k = 10⁻³ mm⁴/(N s), 2.5 µm/s to 1 % strain in 6.4 s steps.
    pub fn cartilage_default() -> Self {
        Self {
            mesh: MeshSource::Generate(MeshSpec::QuarterCylinder(QuarterCylinderSpec {
                radius: 18.0,
                height: 8.0,
                nc: 8,
                nr: 7,
                nz: 5,
            })),
            material: NeoHookeParams {
                lambda: 0.2,
                mu: 0.5,
            },
            permeability: PermeabilityParams { k: 1e-3 },
            dt: 6.4,
            rate: 2.5e-3,
            target_strain: 0.01,
            gls_enabled: false,
            contact: Contact::Frictionless,
            reference_line: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let MeshSource::Generate(spec) = &self.mesh {
            spec.validate()?;
        }
        NeoHookeParams::new(self.material.lambda, self.material.mu)?;
        PermeabilityParams::new(self.permeability.k)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "time.dt_s must be positive, got {}",
                self.dt
            )));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::Config(format!(
                "time.rate_mm_per_s must be positive, got {}",
                self.rate
            )));
        }
        if !(self.target_strain > 0.0 && self.target_strain < 1.0) {
            return Err(Error::Config(format!(
                "time.target_strain must lie in (0, 1), got {}",
                self.target_strain
            )));
        }
        if let Some(line) = &self.reference_line {
            let l2: f64 = line.direction.iter().map(|d| d * d).sum();
            if !(l2 > 0.0)
                || !line
                    .point
                    .iter()
                    .chain(&line.direction)
                    .all(|v| v.is_finite())
            {
                return Err(Error::Config(
                    "output.profile_line needs a finite, nonzero direction".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of steps of size `dt` needed to compress `height` by the target
    /// strain.
    pub fn n_steps(&self, height: f64) -> usize {
        let x = self.target_strain * height / (self.rate * self.dt);
        let n = libm::ceil(x - 1e-9);
        (n as usize).max(1)
    }
}

/// A mesh together with everything needed to march it in time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mesh: Mesh,
    pub bcs: BoundaryConditionSet,
    pub material: NeoHookeParams,
    pub permeability: PermeabilityParams,
    pub gls_enabled: bool,
    pub dt: f64,
    pub n_steps: usize,
    pub reference_line: Line,
}

/// Result of [`Scenario::run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub dofs: DofMap,
    pub trajectory: Trajectory,
    /// Stabilization factor range for the nominal step, N/mm².
    pub tau_range: (f64, f64),
}

impl Scenario {
    pub fn height(&self) -> f64 {
        z_extent(&self.mesh)
    }

    pub fn loading(&self, dofs: &DofMap) -> Result<ResolvedLoading> {
        self.bcs.resolve(&self.mesh, dofs)
    }

    pub fn discretization(&self) -> Result<Discretization<'_, NeoHookeParams>> {
        Discretization::new(
            &self.mesh,
            self.material,
            self.permeability,
            self.gls_enabled,
        )
    }

    /// Marches `n_steps` steps from rest.
    pub fn run<L: LinearSolver>(
        &self,
        linear: L,
        settings: NewtonSettings,
        observer: Option<&mut dyn FnMut(&IterationInfo)>,
    ) -> Result<RunOutput> {
        let disc = self.discretization()?;
        let dofs = disc.dofs.clone();
        let tau_range = disc.tau_range(self.dt)?;
        let loading = self.loading(&dofs)?;
        let mut solver = Solver::new(disc, linear, settings)?;
        let initial = SolutionState::zeros(&dofs);
        let trajectory = march(
            &mut solver,
            initial,
            self.n_steps,
            self.dt,
            &loading,
            observer,
        )?;
        Ok(RunOutput {
            dofs,
            trajectory,
            tau_range,
        })
    }
}

fn z_extent(mesh: &Mesh) -> f64 {
    let (lo, hi) = mesh
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.coords[2]), hi.max(v.coords[2]))
        });
    hi - lo
}

fn first_existing<'m>(mesh: &Mesh, names: &[&'m str]) -> Result<&'m str> {
    names
        .iter()
        .copied()
        .find(|n| mesh.facet_sets.contains_key(*n))
        .ok_or_else(|| Error::Config(format!("mesh has none of the facet sets {names:?}")))
}

/// Platen compression between drained, impermeable-sided faces:
/// top `u_z = −rate·t`, bottom `u_z = 0`, `p = 0` on both, symmetry planes
/// rollered. Quarter-cylinder meshes use `sym_x`/`sym_y`, boxes `x0`/`y0`.
pub fn build_unconfined_compression(config: &SimulationConfig, mesh: Mesh) -> Result<Scenario> {
    config.validate()?;
    for name in ["top", "bottom"] {
        mesh.facet_set(name)?;
    }
    let sym_x = first_existing(&mesh, &["sym_x", "x0"])?;
    let sym_y = first_existing(&mesh, &["sym_y", "y0"])?;
    let mut bcs = BoundaryConditionSet::default();
    bcs.fix(
        "top",
        Field::Displacement(2),
        Program::Ramp { rate: -config.rate },
    );
    bcs.fix("bottom", Field::Displacement(2), Program::Constant(0.0));
    if config.contact == Contact::Tied {
        for c in 0..2 {
            bcs.fix("top", Field::Displacement(c), Program::Constant(0.0));
            bcs.fix("bottom", Field::Displacement(c), Program::Constant(0.0));
        }
    }
    bcs.fix(sym_x, Field::Displacement(0), Program::Constant(0.0));
    bcs.fix(sym_y, Field::Displacement(1), Program::Constant(0.0));
    bcs.fix("top", Field::Pressure, Program::Constant(0.0));
    bcs.fix("bottom", Field::Pressure, Program::Constant(0.0));

    let height = z_extent(&mesh);
    Ok(Scenario {
        n_steps: config.n_steps(height),
        reference_line: config.reference_line.unwrap_or(Line::vertical(0.0, 0.0)),
        mesh,
        bcs,
        material: config.material,
        permeability: config.permeability,
        gls_enabled: config.gls_enabled,
        dt: config.dt,
    })
}

/// Oedometer column for one-dimensional consolidation checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerzaghiColumn {
    /// mm
    pub height: f64,
    /// Side of the square cross-section, mm.
    pub width: f64,
    /// Element layers through the height.
    pub layers: usize,
    /// Compressive traction on the top face, MPa.
    pub sigma0: f64,
    pub material: NeoHookeParams,
    pub permeability: PermeabilityParams,
    pub dt: f64,
    pub n_steps: usize,
}

/// Column loaded by a sudden traction `σ₀` on a drained top; the base and
/// the sides are impermeable and rollered, so the deformation is uniaxial.
pub fn build_terzaghi_column(col: &TerzaghiColumn) -> Result<Scenario> {
    if !(col.sigma0 >= 0.0 && col.sigma0.is_finite()) {
        return Err(Error::Config(format!(
            "sigma0 must be non-negative, got {}",
            col.sigma0
        )));
    }
    if !(col.dt > 0.0) {
        return Err(Error::Config(format!(
            "time step must be positive, got {}",
            col.dt
        )));
    }
    NeoHookeParams::new(col.material.lambda, col.material.mu)?;
    PermeabilityParams::new(col.permeability.k)?;
    let mesh = generate_box(&BoxSpec {
        lengths: [col.width, col.width, col.height],
        cells: [1, 1, col.layers],
    })?;
    let mut bcs = BoundaryConditionSet::default();
    for (set, c) in [("x0", 0), ("x1", 0), ("y0", 1), ("y1", 1), ("bottom", 2)] {
        bcs.fix(set, Field::Displacement(c), Program::Constant(0.0));
    }
    bcs.fix("top", Field::Pressure, Program::Constant(0.0));
    bcs.tractions.push(TractionBc {
        set: "top".into(),
        direction: [0.0, 0.0, -1.0],
        program: Program::Step(col.sigma0),
    });
    Ok(Scenario {
        mesh,
        bcs,
        material: col.material,
        permeability: col.permeability,
        gls_enabled: false,
        dt: col.dt,
        n_steps: col.n_steps,
        reference_line: Line::vertical(0.0, 0.0),
    })
}
