use biphasic_core::linsolve::EnvelopeLdlt;
use biphasic_core::material::{NeoHookeParams, PermeabilityParams};
use biphasic_core::mesh::{Mesh, MeshSpec, QuarterCylinderSpec};
use biphasic_core::oracle::TerzaghiParams;
use biphasic_core::postprocess::{extract_profile, profile_nodes};
use biphasic_core::scenario::{
    build_terzaghi_column, build_unconfined_compression, MeshSource, SimulationConfig,
    TerzaghiColumn,
};
use biphasic_core::solver::{march, NewtonSettings, SolutionState, Solver};
use biphasic_core::Error;

fn coarse_cylinder_config(strain_steps: usize) -> SimulationConfig {
    let mut cfg = SimulationConfig::cartilage_default();
    cfg.mesh = MeshSource::Generate(MeshSpec::QuarterCylinder(QuarterCylinderSpec {
        radius: 18.0,
        height: 8.0,
        nc: 2,
        nr: 2,
        nz: 2,
    }));
    cfg.target_strain = strain_steps as f64 * cfg.rate * cfg.dt / 8.0;
    cfg
}

fn coarse_mesh(cfg: &SimulationConfig) -> Mesh {
    match &cfg.mesh {
        MeshSource::Generate(spec) => spec.generate().unwrap(),
        MeshSource::File(_) => unreachable!(),
    }
}

fn column(sigma0: f64, layers: usize, dt: f64, n_steps: usize) -> TerzaghiColumn {
    TerzaghiColumn {
        height: 2.0,
        width: 0.5,
        layers,
        sigma0,
        material: NeoHookeParams {
            lambda: 0.2,
            mu: 0.5,
        },
        permeability: PermeabilityParams { k: 1e-3 },
        dt,
        n_steps,
    }
}

#[test]
fn tiny_load_converges_in_at_most_two_iterations() {
    let sc = build_terzaghi_column(&column(1e-9, 4, 1.0, 3)).unwrap();
    let out = sc
        .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
        .unwrap();
    for r in &out.trajectory.reports {
        assert!(r.iterations <= 2, "{r:?}");
        assert_eq!(r.substeps, 1);
    }
}

#[test]
fn one_iteration_budget_fails_with_history() {
    let cfg = coarse_cylinder_config(1);
    let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
    let settings = NewtonSettings {
        max_iters: 1,
        max_step_halvings: 1,
        ..NewtonSettings::default()
    };
    match sc.run(EnvelopeLdlt::new(), settings, None) {
        Err(Error::StepFailure {
            halvings, history, ..
        }) => {
            assert_eq!(halvings, 1);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected a step failure, got {other:?}"),
    }
}

#[test]
fn residual_decreases_every_iteration() {
    let cfg = coarse_cylinder_config(2);
    let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
    let out = sc
        .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
        .unwrap();
    for r in &out.trajectory.reports {
        assert!(r.history.windows(2).all(|w| w[1] < w[0]), "{:?}", r.history);
        assert!(r.history.last().unwrap() <= &(1e-8 * r.history[0] + 1e-10));
    }
}

#[test]
fn tangent_reuse_gives_the_same_states() {
    let cfg = coarse_cylinder_config(3);
    let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
    let full = sc
        .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
        .unwrap();
    let reuse = NewtonSettings {
        tangent_reuse: Some(0.1),
        ..NewtonSettings::default()
    };
    let modified = sc.run(EnvelopeLdlt::new(), reuse, None).unwrap();
    let nf: usize = full
        .trajectory
        .reports
        .iter()
        .map(|r| r.factorizations)
        .sum();
    let nm: usize = modified
        .trajectory
        .reports
        .iter()
        .map(|r| r.factorizations)
        .sum();
    assert!(nm < nf, "{nm} vs {nf}");
    let a = full.trajectory.states.last().unwrap();
    let b = modified.trajectory.states.last().unwrap();
    let scale = a.max_abs_pressure();
    for (x, y) in a.p.iter().zip(&b.p) {
        assert!((x - y).abs() < 1e-6 * scale);
    }
}

#[test]
fn jacobian_is_symmetric_on_every_iteration() {
    for gls in [false, true] {
        let mut cfg = coarse_cylinder_config(3);
        cfg.gls_enabled = gls;
        let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
        let mut seen = 0;
        let mut check = |info: &biphasic_core::solver::IterationInfo| {
            seen += 1;
            assert!(info.matrix.symmetry_defect() < 1e-12);
        };
        sc.run(
            EnvelopeLdlt::new(),
            NewtonSettings::default(),
            Some(&mut check),
        )
        .unwrap();
        assert!(seen >= 6);
    }
}

#[test]
fn column_drains_to_steady_state() {
    let col = column(1e-3, 4, 1.0, 0);
    let sc = build_terzaghi_column(&col).unwrap();
    let disc = sc.discretization().unwrap();
    let dofs = disc.dofs.clone();
    let loading = sc.loading(&dofs).unwrap();
    let prm = TerzaghiParams::new(
        col.height,
        col.sigma0,
        col.material.constrained_modulus(),
        1e-3,
        50,
    )
    .unwrap();
    // twenty consolidation times
    let t_end = 20.0 * col.height * col.height / prm.cv();
    let mut solver = Solver::new(disc, EnvelopeLdlt::new(), NewtonSettings::default()).unwrap();
    let traj = march(
        &mut solver,
        SolutionState::zeros(&dofs),
        40,
        t_end / 40.0,
        &loading,
        None,
    )
    .unwrap();
    let end = traj.states.last().unwrap();
    assert!(end.max_abs_pressure() < 1e-6 * col.sigma0);
    // drained settlement of the top face: σ₀ H / M to first order
    let top = dofs.u_dof(sc.mesh.facet_set_nodes("top").unwrap()[0], 2);
    let settlement = -end.u[top];
    let expected = col.sigma0 * col.height / col.material.constrained_modulus();
    assert!(
        (settlement - expected).abs() < 0.01 * expected,
        "{settlement} vs {expected}"
    );
}

#[test]
fn undrained_response_carries_the_load_in_the_fluid() {
    let col = column(1e-3, 8, 1e-3, 1);
    let sc = build_terzaghi_column(&col).unwrap();
    let out = sc
        .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
        .unwrap();
    let nodes = profile_nodes(&sc.mesh, &out.dofs, &sc.reference_line, 1e-9).unwrap();
    let prof = extract_profile(
        &sc.mesh,
        &out.dofs,
        out.trajectory.states.last().unwrap(),
        &sc.reference_line,
        &nodes,
    )
    .unwrap();
    // away from the drained top the pressure equals the applied traction
    for &(z, p) in &prof.points {
        if z < 1.0 {
            assert!((p - col.sigma0).abs() < 0.02 * col.sigma0, "z {z}: {p}");
        }
    }
}

#[test]
fn converged_states_satisfy_mass_balance() {
    let cfg = coarse_cylinder_config(3);
    let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
    let out = sc
        .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
        .unwrap();
    let disc = sc.discretization().unwrap();
    let fixed = sc.loading(&out.dofs).unwrap().constrained_dofs();
    let states = &out.trajectory.states;
    assert_eq!(states.len(), out.trajectory.reports.len() + 1);
    for (i, report) in out.trajectory.reports.iter().enumerate() {
        let sys = disc.assemble(&states[i + 1], &states[i], cfg.dt).unwrap();
        let norm = out
            .dofs
            .pressure_nodes()
            .iter()
            .filter_map(|&n| out.dofs.p_dof(n))
            .filter(|d| fixed.binary_search(d).is_err())
            .map(|d| sys.residual[d] * sys.residual[d])
            .sum::<f64>()
            .sqrt();
        assert!(norm <= 1e-8 * report.history[0] + 1e-10, "step {i}: {norm}");
    }
}

#[test]
fn high_permeability_leaves_only_seepage_pressure() {
    let first_step_peak = |k: f64| {
        let mut cfg = coarse_cylinder_config(1);
        cfg.permeability = PermeabilityParams { k };
        let sc = build_unconfined_compression(&cfg, coarse_mesh(&cfg)).unwrap();
        let out = sc
            .run(EnvelopeLdlt::new(), NewtonSettings::default(), None)
            .unwrap();
        out.trajectory.states[1].max_abs_pressure()
    };
    let tight = first_step_peak(1e-3);
    let (k100, k1000) = (first_step_peak(100.0), first_step_peak(1000.0));
    // no transient left: the pressure only drives the squeezed-out flow, so p ∝ 1/k
    assert!((k1000 / k100 - 0.1).abs() < 0.005, "{k100} vs {k1000}");
    assert!(k100 < 0.05 * tight, "{k100} vs {tight}");
}
