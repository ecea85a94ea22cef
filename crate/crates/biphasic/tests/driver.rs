use biphasic::config::RunConfig;
use biphasic::driver::{
    mesh_stats, quadrature_error, simulate, solve, sweep, verify, verify_model, RunStatus,
    SweepAxis, VerifyOptions, CARTILAGE,
};
use biphasic::error::exit;
use biphasic::output::{read_profile_csv, RunSummary};
use biphasic_core::material::{Kinematics, SolidModel};
use biphasic_core::mesh::{generate_box, BoxSpec, Line};
use nalgebra::{Matrix3, Matrix6};

/// Small box compression: 2×2×1 mm, 2×2×4 cells, three steps.
fn box_config(dir: &std::path::Path) -> RunConfig {
    let mut cfg = RunConfig::cartilage_default()
        .with_overrides(&[
            "mesh.shape=\"box\"".into(),
            "mesh.lx_mm=2.0".into(),
            "mesh.ly_mm=2.0".into(),
            "mesh.lz_mm=1.0".into(),
            "mesh.nx=2".into(),
            "mesh.ny=2".into(),
            "mesh.nz=4".into(),
            "time.target_strain=0.048".into(),
        ])
        .unwrap();
    cfg.output.dir = dir.to_path_buf();
    cfg.output.vtk_every = 2;
    cfg
}

#[test]
fn unit_box_counts() {
    let mesh = generate_box(&BoxSpec {
        lengths: [1.0; 3],
        cells: [1; 3],
    })
    .unwrap();
    let s = mesh_stats(&mesh, &Line::vertical(0.0, 0.0));
    assert_eq!((s.nodes, s.elements, s.line_elements), (27, 6, 1));
    assert_eq!(
        mesh_stats(&mesh, &Line::vertical(5.0, 5.0)).line_elements,
        0
    );
}

#[test]
fn solve_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(dir.path());
    let run = solve(&cfg).unwrap();
    assert_eq!(run.summary.steps, 3);
    for name in [
        "step_0.vtk",
        "step_2.vtk",
        "step_3.vtk",
        "profile.csv",
        "summary.txt",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    assert!(!dir.path().join("step_1.vtk").exists());
    let rows = read_profile_csv(&dir.path().join("profile.csv")).unwrap();
    assert_eq!(rows.len(), 4 * run.line_nodes.len());
    assert_eq!(rows.last().unwrap().step, 3);
    let summary = RunSummary::read(&dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary, run.summary);
    assert_eq!(summary.newton.iterations.len(), 3);
    assert!(summary.peak_pressure_mpa > 0.0);
    assert!(!summary.gls_enabled && summary.tau_max == 0.0);
    assert!(summary.metrics.is_some());
}

#[test]
fn simulation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(dir.path());
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a.final_state(), b.final_state());
    assert!(!dir.path().join("summary.txt").exists());
}

#[test]
fn step_failure_maps_to_its_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(dir.path())
        .with_overrides(&[
            "solver.max_iters=1".into(),
            "solver.max_step_halvings=0".into(),
        ])
        .unwrap();
    let err = simulate(&cfg).err().unwrap();
    assert_eq!(err.exit_code(), exit::STEP_FAILURE, "{err}");
}

#[test]
fn sweep_records_both_gls_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(&dir.path().join("unused"));
    let rows = sweep(&cfg, SweepAxis::Permeability, &[1e-2, 1e-3], dir.path()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows.iter()
            .map(|r| (r.axis_value, r.gls))
            .collect::<Vec<_>>(),
        [(1e-2, false), (1e-2, true), (1e-3, false), (1e-3, true)]
    );
    assert!(
        rows.iter()
            .all(|r| r.status == RunStatus::Ok && r.newton_iters_total > 0),
        "{rows:?}"
    );
    // lower permeability pressurizes more
    assert!(rows[2].peak_pressure_mpa > rows[0].peak_pressure_mpa);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(text.starts_with(
        "axis_value,gls,overshoot_pct,undershoot_pct,peak_pressure_mpa,newton_iters_total,status\n"
    ));
    assert_eq!(text.lines().count(), 5);
    let on = RunSummary::read(&dir.path().join("permeability_1_gls_on/summary.txt")).unwrap();
    assert!(on.gls_enabled && 0.0 < on.tau_min && on.tau_min <= on.tau_max);
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn sweep_continues_past_failed_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(dir.path());
    let rows = sweep(&cfg, SweepAxis::Permeability, &[-1.0, 1e-2], dir.path()).unwrap();
    assert!(rows[0].status.is_failure() && rows[1].status.is_failure());
    assert_eq!(
        (&rows[2].status, &rows[3].status),
        (&RunStatus::Ok, &RunStatus::Ok)
    );
    assert!(rows[0].peak_pressure_mpa.is_nan());
}

#[test]
fn sweep_rejects_bad_specifications() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = box_config(dir.path());
    let empty = sweep(&cfg, SweepAxis::Dt, &[], dir.path()).unwrap_err();
    assert_eq!(empty.exit_code(), exit::CONFIG);
    assert!(sweep(&cfg, SweepAxis::Mesh, &[1.5], dir.path()).is_err());
    assert!(sweep(&cfg, SweepAxis::Mesh, &[5.0], dir.path()).is_err());
    assert!("pressure".parse::<SweepAxis>().is_err());
    for axis in SweepAxis::ALL {
        assert_eq!(axis.name().parse::<SweepAxis>().unwrap(), axis);
    }
}

#[test]
fn quadrature_is_exact_to_degree_two() {
    assert!(quadrature_error() < 1e-14);
}

#[test]
fn built_in_checks_pass_and_refinement_converges() {
    let checks = verify(&VerifyOptions {
        terzaghi_refine: 3,
        ..VerifyOptions::default()
    })
    .unwrap();
    for c in &checks {
        assert!(c.passed, "{c:?}");
    }
    let errors: Vec<f64> = checks
        .iter()
        .filter(|c| c.name.starts_with("consolidation L2"))
        .map(|c| c.value)
        .collect();
    assert_eq!(errors.len(), 3);
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

/// Neo-Hookean stress with a tangent that omits the λ term.
struct BrokenTangent;

impl SolidModel for BrokenTangent {
    fn strain_energy(&self, kin: &Kinematics) -> f64 {
        CARTILAGE.strain_energy(kin)
    }

    fn cauchy_stress(&self, kin: &Kinematics) -> Matrix3<f64> {
        CARTILAGE.cauchy_stress(kin)
    }

    fn spatial_tangent(&self, kin: &Kinematics) -> Matrix6<f64> {
        let mut c = CARTILAGE.spatial_tangent(kin);
        for i in 0..3 {
            for j in 0..3 {
                c[(i, j)] -= CARTILAGE.lambda / kin.j;
            }
        }
        c
    }
}

#[test]
fn broken_tangent_fails_verification() {
    let checks = verify_model(&BrokenTangent, &VerifyOptions::default()).unwrap();
    let tangent = checks
        .iter()
        .find(|c| c.name.starts_with("tangent"))
        .unwrap();
    assert!(!tangent.passed);
    assert!(
        checks
            .iter()
            .find(|c| c.name.starts_with("stress vs energy"))
            .unwrap()
            .passed
    );
}
