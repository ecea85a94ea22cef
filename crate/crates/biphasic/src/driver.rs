//! Library side of the command line: one function per command.

use std::fs;
use std::path::{Path, PathBuf};

use biphasic_core::element::quadrature_tet4pt;
use biphasic_core::material::{Kinematics, NeoHookeParams, PermeabilityParams, SolidModel};
use biphasic_core::mesh::{generate_box, BoxSpec, Line, Mesh, MeshSpec, QuarterCylinderSpec};
use biphasic_core::oracle::{
    dense_assembly_oracle, fd_check_stress, fd_check_tangent, terzaghi_pressure,
    terzaghi_time_for_consolidation, TerzaghiParams,
};
use biphasic_core::postprocess::{
    extract_profile, oscillation_metric, profile_nodes, PressureProfile,
};
use biphasic_core::scenario::{
    build_terzaghi_column, build_unconfined_compression, MeshSource, RunOutput, Scenario,
    SimulationConfig, TerzaghiColumn,
};
use biphasic_core::solver::{
    march, Discretization, IterationInfo, NewtonSettings, SolutionState, Solver,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::direct::SparseLdlt;
use crate::error::{AppError, Result};
use crate::mesh_io::read_mesh;
use crate::output::{
    profile_rows, write_profile_csv, write_vtk, MetricSummary, NewtonSummary, RunSummary,
};

/// Distance within which nodes count as lying on the reference line, mm.
pub const LINE_TOLERANCE: f64 = 1e-6;

pub fn load_mesh(source: &MeshSource) -> Result<Mesh> {
    match source {
        MeshSource::Generate(spec) => Ok(spec.generate()?),
        MeshSource::File(path) => read_mesh(Path::new(path)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshStats {
    pub nodes: usize,
    pub elements: usize,
    /// Elements crossed by the reference line, 0 if the line misses the mesh.
    pub line_elements: usize,
}

pub fn mesh_stats(mesh: &Mesh, line: &Line) -> MeshStats {
    MeshStats {
        nodes: mesh.num_nodes(),
        elements: mesh.elements.len(),
        line_elements: mesh
            .reference_line_nodes(line, LINE_TOLERANCE)
            .map_or(0, |nodes| mesh.elements_on_line(&nodes)),
    }
}

/// A finished compression run held in memory.
pub struct Simulation {
    pub scenario: Scenario,
    pub output: RunOutput,
    /// Corner nodes on the reference line, in axial order.
    pub line_nodes: Vec<usize>,
    /// Reference-line profile of every state, starting with the initial one.
    pub profiles: Vec<PressureProfile>,
    pub summary: RunSummary,
}

impl Simulation {
    pub fn final_profile(&self) -> &PressureProfile {
        self.profiles
            .last()
            .expect("the initial state is always present")
    }

    pub fn final_state(&self) -> &SolutionState {
        self.output
            .trajectory
            .states
            .last()
            .expect("the initial state is always present")
    }
}

/// Builds the compression scenario of `cfg` and marches it to the target
/// strain without touching the file system (apart from reading a mesh file).
pub fn simulate(cfg: &RunConfig) -> Result<Simulation> {
    let sim = &cfg.simulation;
    sim.validate()?;
    let mesh = load_mesh(&sim.mesh)?;
    let scenario = build_unconfined_compression(sim, mesh)?;
    let output = scenario.run(SparseLdlt::new(), cfg.newton, None)?;
    let line_nodes = profile_nodes(
        &scenario.mesh,
        &output.dofs,
        &scenario.reference_line,
        LINE_TOLERANCE,
    )?;
    let profiles = output
        .trajectory
        .states
        .iter()
        .map(|s| {
            extract_profile(
                &scenario.mesh,
                &output.dofs,
                s,
                &scenario.reference_line,
                &line_nodes,
            )
        })
        .collect::<biphasic_core::error::Result<Vec<_>>>()?;
    let last = profiles.last().expect("initial state present");
    let (metrics, metric_error) = match oscillation_metric(last) {
        Ok(r) => (Some(MetricSummary::from(r)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let reports = &output.trajectory.reports;
    let config: toml::Table = cfg
        .to_toml()
        .parse()
        .expect("serialized configuration parses");
    let summary = RunSummary {
        gls_enabled: sim.gls_enabled,
        tau_min: output.tau_range.0,
        tau_max: output.tau_range.1,
        nodes: scenario.mesh.num_nodes(),
        elements: scenario.mesh.elements.len(),
        steps: reports.len(),
        final_time_s: output.trajectory.states.last().map_or(0.0, |s| s.t),
        peak_pressure_mpa: last.peak(),
        metrics,
        metric_error,
        newton: NewtonSummary {
            total_iterations: reports.iter().map(|r| r.iterations).sum(),
            iterations: reports.iter().map(|r| r.iterations).collect(),
            factorizations: reports.iter().map(|r| r.factorizations).collect(),
            substeps: reports.iter().map(|r| r.substeps).collect(),
        },
        config,
    };
    Ok(Simulation {
        scenario,
        output,
        line_nodes,
        profiles,
        summary,
    })
}

/// Runs [`simulate`] and writes `step_<i>.vtk`, `profile.csv` and
/// `summary.txt` into `cfg.output.dir`.
pub fn solve(cfg: &RunConfig) -> Result<Simulation> {
    let run = simulate(cfg)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    if cfg.output.vtk_every > 0 {
        let states = &run.output.trajectory.states;
        for (i, state) in states.iter().enumerate() {
            if i % cfg.output.vtk_every == 0 || i + 1 == states.len() {
                write_vtk(
                    &dir.join(format!("step_{i}.vtk")),
                    &run.scenario.mesh,
                    &run.output.dofs,
                    state,
                    &run.scenario.permeability,
                )?;
            }
        }
    }
    let rows = profile_rows(
        run.profiles
            .iter()
            .zip(&run.output.trajectory.states)
            .enumerate()
            .map(|(i, (p, s))| (i, s.t, p)),
    );
    write_profile_csv(&dir.join("profile.csv"), &rows)?;
    run.summary.write(&dir.join("summary.txt"))?;
    Ok(run)
}

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for values that are only reported.
    pub limit: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: Some(limit),
            passed: value < limit,
        }
    }

    fn reported(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: None,
            passed: value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Consolidation resolutions: 16 layers, then 8 and 4 layers as well.
    pub terzaghi_refine: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 7,
            terzaghi_refine: 1,
        }
    }
}

pub const CARTILAGE: NeoHookeParams = NeoHookeParams {
    lambda: 0.2,
    mu: 0.5,
};

/// Limit of the consolidation error at the finest resolution.
pub const TERZAGHI_TOLERANCE: f64 = 0.02;

/// All checks on the built-in material.
pub fn verify(opts: &VerifyOptions) -> Result<Vec<Check>> {
    verify_model(&CARTILAGE, opts)
}

/// Runs every check with `model` as the solid.
pub fn verify_model<M: SolidModel>(model: &M, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = vec![
        Check::below(
            "stress vs energy finite differences",
            fd_check_stress(model, opts.trials, opts.seed)?,
            1e-5,
        ),
        Check::below(
            "tangent vs stress finite differences",
            fd_check_tangent(model, opts.trials, opts.seed)?,
            1e-4,
        ),
    ];
    let rest = Kinematics::identity();
    let at_rest = model
        .cauchy_stress(&rest)
        .abs()
        .max()
        .max(model.strain_energy(&rest).abs());
    checks.push(Check {
        name: "stress and energy vanish at rest".into(),
        value: at_rest,
        limit: Some(0.0),
        passed: at_rest == 0.0,
    });
    checks.push(Check::below(
        "4-point rule on degree <= 2 monomials",
        quadrature_error(),
        1e-14,
    ));
    checks.push(Check::below(
        "sparse vs dense assembly",
        assembly_difference(model, opts.seed)?,
        1e-14,
    ));
    checks.push(Check::below(
        "matrix symmetry over a coarse run",
        symmetry_defect(model)?,
        1e-12,
    ));

    let errors = terzaghi_refinement(opts.terzaghi_refine.max(1))?;
    let (finest, coarse) = errors.split_last().expect("at least one level");
    for (layers, err) in coarse {
        checks.push(Check::reported(
            format!("consolidation L2 error, {layers} layers"),
            *err,
        ));
    }
    checks.push(Check::below(
        format!("consolidation L2 error, {} layers", finest.0),
        finest.1,
        TERZAGHI_TOLERANCE,
    ));
    if !coarse.is_empty() {
        checks.push(Check {
            name: "consolidation error decreases under refinement".into(),
            value: finest.1 / errors[0].1,
            limit: Some(1.0),
            passed: errors.windows(2).all(|w| w[1].1 < w[0].1),
        });
    }
    Ok(checks)
}

/// Worst relative asymmetry `max|A - Aᵀ| / max|A|` of the Jacobian over all
/// Newton iterations of a 3-step run on a coarse quarter cylinder, with and
/// without stabilization.
pub fn symmetry_defect<M: SolidModel>(model: &M) -> Result<f64> {
    let mesh = MeshSpec::QuarterCylinder(QuarterCylinderSpec {
        radius: 18.0,
        height: 8.0,
        nc: 2,
        nr: 2,
        nz: 2,
    })
    .generate()?;
    let mut worst: f64 = 0.0;
    for gls in [false, true] {
        let mut cfg = SimulationConfig::cartilage_default();
        cfg.gls_enabled = gls;
        cfg.target_strain = 3.0 * cfg.rate * cfg.dt / 8.0;
        let sc = build_unconfined_compression(&cfg, mesh.clone())?;
        let disc = Discretization::new(&sc.mesh, model, sc.permeability, gls)?;
        let dofs = disc.dofs.clone();
        let loading = sc.loading(&dofs)?;
        let mut solver = Solver::new(disc, SparseLdlt::new(), NewtonSettings::default())?;
        let mut observe = |info: &IterationInfo| {
            worst = worst.max(info.matrix.symmetry_defect());
        };
        march(
            &mut solver,
            SolutionState::zeros(&dofs),
            sc.n_steps,
            sc.dt,
            &loading,
            Some(&mut observe),
        )?;
    }
    Ok(worst)
}

/// Largest error of the 4-point rule over all monomials of degree <= 2 on
/// the reference tetrahedron.
pub fn quadrature_error() -> f64 {
    let rule = quadrature_tet4pt();
    let mut worst: f64 = 0.0;
    for a in 0..=2u32 {
        for b in 0..=(2 - a) {
            for c in 0..=(2 - a - b) {
                let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(rule.weights)
                    .map(|(x, w)| {
                        w * x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                    })
                    .sum();
                worst = worst.max((approx - exact).abs());
            }
        }
    }
    worst
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Max-abs difference between the sparse assembly and the dense oracle on
/// a one-cell box with a random state, GLS on.
pub fn assembly_difference<M: SolidModel>(model: &M, seed: u64) -> Result<f64> {
    let mesh = generate_box(&BoxSpec {
        lengths: [1.0, 1.2, 0.9],
        cells: [1, 1, 1],
    })?;
    let perm = PermeabilityParams { k: 1e-2 };
    let dt = 0.5;
    let disc = Discretization::new(&mesh, model, perm, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SolutionState::zeros(&disc.dofs);
    let mut prev = SolutionState::zeros(&disc.dofs);
    for v in state.u.iter_mut() {
        *v = rng.gen_range(-0.02..0.02);
    }
    for v in prev.u.iter_mut() {
        *v = rng.gen_range(-0.02..0.02);
    }
    for v in state.p.iter_mut() {
        *v = rng.gen_range(-0.01..0.01);
    }
    let sys = disc.assemble(&state, &prev, dt)?;
    let dense = dense_assembly_oracle(&mesh, &state.u, &prev.u, &state.p, model, &perm, true, dt)?;
    // the oracle numbers dofs like the map: u first, then pressures by node
    let a = sys.matrix.to_dense();
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(&dense.matrix) {
        worst = worst.max((x - y).abs());
    }
    for (x, y) in sys.residual.iter().zip(&dense.residual) {
        worst = worst.max((x - y).abs());
    }
    Ok(worst)
}

/// Consolidation column used by the verification: 8 mm high, σ₀ = 10⁻³ MPa
/// (peak strain below 0.1 %), λ = 0.2 MPa, μ = 0.5 MPa, k = 10⁻³.
pub fn terzaghi_column(layers: usize) -> TerzaghiColumn {
    let height = 8.0;
    TerzaghiColumn {
        height,
        width: height / layers as f64,
        layers,
        sigma0: 1e-3,
        material: CARTILAGE,
        permeability: PermeabilityParams { k: 1e-3 },
        dt: 1.0,
        n_steps: 0,
    }
}

/// Degrees of average consolidation at which profiles are compared.
pub const CONSOLIDATION_LEVELS: [f64; 3] = [0.2, 0.5, 0.8];

/// Relative L2 error of the column's pressure profile against the 200-term
/// series at each of `CONSOLIDATION_LEVELS`.
pub fn terzaghi_errors(layers: usize) -> Result<Vec<(f64, f64)>> {
    let col = terzaghi_column(layers);
    let prm = TerzaghiParams::new(
        col.height,
        col.sigma0,
        col.material.constrained_modulus(),
        col.permeability.k,
        200,
    )?;
    let targets = CONSOLIDATION_LEVELS
        .iter()
        .map(|&u| terzaghi_time_for_consolidation(u, &prm))
        .collect::<biphasic_core::error::Result<Vec<_>>>()?;
    let scenario = build_terzaghi_column(&col)?;
    let disc = scenario.discretization()?;
    let dofs = disc.dofs.clone();
    let loading = scenario.loading(&dofs)?;
    let line = scenario.reference_line;
    let nodes = profile_nodes(&scenario.mesh, &dofs, &line, LINE_TOLERANCE)?;
    let mut solver = Solver::new(disc, SparseLdlt::new(), NewtonSettings::default())?;
    let mut state = SolutionState::zeros(&dofs);
    let times = step_times(&targets, col.height / layers as f64, prm.cv());
    let mut out = Vec::new();
    let mut next_target = 0;
    for &t in &times {
        let dt = t - state.t;
        let (s, _) = solver.step(&state, dt, &loading, None)?;
        state = s;
        state.t = t;
        if next_target < targets.len() && t == targets[next_target] {
            let prof = extract_profile(&scenario.mesh, &dofs, &state, &line, &nodes)?;
            let (mut num, mut den) = (0.0, 0.0);
            for &(z, p) in &prof.points {
                let exact = terzaghi_pressure(z, t, &prm)?;
                num += (p - exact) * (p - exact);
                den += exact * exact;
            }
            out.push((CONSOLIDATION_LEVELS[next_target], (num / den).sqrt()));
            next_target += 1;
        }
    }
    Ok(out)
}

/// Step end times for a step of `0.5 h² / c_v`, shortened where needed so
/// every target time is hit exactly.
fn step_times(targets: &[f64], h: f64, cv: f64) -> Vec<f64> {
    let dt = TERZAGHI_STEP_FACTOR * h * h / cv;
    let mut t = 0.0;
    let mut times = Vec::new();
    for &target in targets {
        while t < target {
            let next = t + dt;
            // merge a sliver step into its predecessor
            let next = if target - next < 0.25 * dt {
                target
            } else {
                next
            };
            times.push(next);
            t = next;
        }
    }
    times
}

/// Consolidation time step in units of `h² / c_v`.
pub const TERZAGHI_STEP_FACTOR: f64 = 0.5;

/// Worst consolidation error for `levels` resolutions: 16 layers at the
/// finest, halved for each coarser level.
pub fn terzaghi_refinement(levels: usize) -> Result<Vec<(usize, f64)>> {
    (0..levels)
        .rev()
        .map(|i| {
            let layers = 16 >> i.min(3);
            let worst = terzaghi_errors(layers)?
                .into_iter()
                .map(|e| e.1)
                .fold(0.0, f64::max);
            Ok((layers, worst))
        })
        .collect()
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Permeability,
    /// Quarter-cylinder resolution level 1 to 4.
    Mesh,
    Dt,
    Rate,
    Strain,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        Self::Permeability,
        Self::Mesh,
        Self::Dt,
        Self::Rate,
        Self::Strain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Permeability => "permeability",
            Self::Mesh => "mesh",
            Self::Dt => "dt",
            Self::Rate => "rate",
            Self::Strain => "strain",
        }
    }

    /// Configuration key the axis sets.
    pub fn key(self) -> &'static str {
        match self {
            Self::Permeability => "fluid.permeability_mm4_per_Ns",
            Self::Mesh => "mesh.level",
            Self::Dt => "time.dt_s",
            Self::Rate => "time.rate_mm_per_s",
            Self::Strain => "time.target_strain",
        }
    }

    fn override_for(self, value: f64) -> Result<String> {
        if self == Self::Mesh {
            if value.fract() != 0.0 || !(1.0..=4.0).contains(&value) {
                return Err(AppError::Config(format!(
                    "mesh levels are 1 to 4, got {value}"
                )));
            }
            return Ok(format!("{}={}", self.key(), value as usize));
        }
        Ok(format!("{}={value:?}", self.key()))
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = AppError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| AppError::Config(format!("unknown sweep axis `{s}`")))
    }
}

/// Outcome of one sweep run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    /// The run finished but its profile has no oscillation metric.
    NoMetric(String),
    Failed(String),
}

impl RunStatus {
    pub fn is_failure(&self) -> bool {
        matches!(self, Self::Failed(_))
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::NoMetric(m) => write!(f, "no metric: {m}"),
            Self::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub gls: bool,
    pub overshoot_pct: f64,
    pub undershoot_pct: f64,
    pub peak_pressure_mpa: f64,
    pub newton_iters_total: usize,
    pub status: RunStatus,
}

/// Solves `base` for every value with GLS off and on, each run writing into
/// its own subdirectory of `out`, then writes `out/sweep.csv`. Failed runs
/// are recorded in their row and do not stop the sweep.
pub fn sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    out: &Path,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(AppError::Config("a sweep needs at least one value".into()));
    }
    let overrides: Vec<String> = values
        .iter()
        .map(|&v| axis.override_for(v))
        .collect::<Result<_>>()?;
    fs::create_dir_all(out).map_err(|e| AppError::io(out, e))?;
    let mut rows = Vec::with_capacity(2 * values.len());
    for (i, (&value, ov)) in values.iter().zip(&overrides).enumerate() {
        for gls in [false, true] {
            let dir: PathBuf = out.join(format!(
                "{}_{i}_gls_{}",
                axis.name(),
                if gls { "on" } else { "off" }
            ));
            let run = base
                .with_overrides(&[ov.clone(), format!("stabilization.gls_enabled={gls}")])
                .map(|mut cfg| {
                    cfg.output.dir = dir;
                    cfg
                })
                .and_then(|cfg| solve(&cfg));
            rows.push(match run {
                Ok(run) => {
                    let s = &run.summary;
                    let m = s.metrics.as_ref();
                    SweepRow {
                        axis_value: value,
                        gls,
                        overshoot_pct: m.map_or(f64::NAN, |m| m.overshoot_pct),
                        undershoot_pct: m.map_or(f64::NAN, |m| m.undershoot_pct),
                        peak_pressure_mpa: s.peak_pressure_mpa,
                        newton_iters_total: s.newton.total_iterations,
                        status: s
                            .metric_error
                            .clone()
                            .map_or(RunStatus::Ok, RunStatus::NoMetric),
                    }
                }
                Err(e) => SweepRow {
                    axis_value: value,
                    gls,
                    overshoot_pct: f64::NAN,
                    undershoot_pct: f64::NAN,
                    peak_pressure_mpa: f64::NAN,
                    newton_iters_total: 0,
                    status: RunStatus::Failed(e.to_string()),
                },
            });
        }
    }
    write_sweep_csv(&out.join("sweep.csv"), &rows)?;
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| AppError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([
        "axis_value",
        "gls",
        "overshoot_pct",
        "undershoot_pct",
        "peak_pressure_mpa",
        "newton_iters_total",
        "status",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            format!("{:?}", r.axis_value),
            r.gls.to_string(),
            format!("{:.16e}", r.overshoot_pct),
            format!("{:.16e}", r.undershoot_pct),
            format!("{:.16e}", r.peak_pressure_mpa),
            r.newton_iters_total.to_string(),
            r.status.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Mesh generation for the `mesh` command.
pub fn mesh_from_spec(spec: &MeshSpec) -> Result<Mesh> {
    Ok(spec.generate()?)
}
