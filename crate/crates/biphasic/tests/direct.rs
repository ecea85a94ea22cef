use biphasic::direct::SparseLdlt;
use biphasic_core::linsolve::{EnvelopeLdlt, LinearSolver};
use biphasic_core::mesh::{MeshSpec, QuarterCylinderSpec};
use biphasic_core::scenario::{build_unconfined_compression, SimulationConfig};
use biphasic_core::solver::{apply_dirichlet, Loading, SolutionState};
use biphasic_core::sparse::CsrMatrix;
use biphasic_core::Error;

/// Constrained first-iteration system of a coarse compression run.
fn compression_system(gls: bool) -> (CsrMatrix, Vec<f64>) {
    let mut cfg = SimulationConfig::cartilage_default();
    cfg.gls_enabled = gls;
    let mesh = MeshSpec::QuarterCylinder(QuarterCylinderSpec {
        radius: 18.0,
        height: 8.0,
        nc: 3,
        nr: 2,
        nz: 3,
    })
    .generate()
    .unwrap();
    let sc = build_unconfined_compression(&cfg, mesh).unwrap();
    let disc = sc.discretization().unwrap();
    let loads = sc.loading(&disc.dofs).unwrap().at(sc.dt).unwrap();
    let prev = SolutionState::zeros(&disc.dofs);
    let mut state = prev.clone();
    for (d, v) in loads.prescribed.iter() {
        state.set_dof(d, v);
    }
    let mut sys = disc.assemble(&state, &prev, sc.dt).unwrap();
    let mut rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
    apply_dirichlet(&mut sys.matrix, &mut rhs, &loads.prescribed.homogeneous()).unwrap();
    (sys.matrix, rhs)
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    let den: f64 = b.iter().map(|q| q * q).sum();
    (num / den).sqrt()
}

#[test]
fn agrees_with_the_envelope_solver() {
    for gls in [false, true] {
        let (a, b) = compression_system(gls);
        let mut x1 = b.clone();
        let mut sparse = SparseLdlt::new();
        sparse.factorize(&a).unwrap();
        sparse.solve_in_place(&mut x1).unwrap();
        assert!(sparse.factor_size() > 0);
        let mut x2 = b.clone();
        let mut env = EnvelopeLdlt::new();
        env.factorize(&a).unwrap();
        env.solve_in_place(&mut x2).unwrap();
        assert!(relative_residual(&a, &x1, &b) < 1e-10);
        let scale = x2.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-8 * scale);
        }
    }
}

#[test]
fn refactorizes_new_values_on_the_same_pattern() {
    let (a, b) = compression_system(false);
    let mut solver = SparseLdlt::new();
    solver.factorize(&a).unwrap();
    let mut scaled = a.clone();
    for v in scaled.values_mut() {
        *v *= 2.0;
    }
    solver.factorize(&scaled).unwrap();
    let mut x = b.clone();
    solver.solve_in_place(&mut x).unwrap();
    assert!(relative_residual(&scaled, &x, &b) < 1e-10);
    // a second right-hand side reuses the factorization
    let mut y: Vec<f64> = b.iter().map(|v| -3.0 * v).collect();
    solver.solve_in_place(&mut y).unwrap();
    for (p, q) in x.iter().zip(&y) {
        assert!((q + 3.0 * p).abs() < 1e-9 * p.abs().max(1e-12));
    }
}

#[test]
fn handles_a_saddle_point_matrix() {
    // [[2, 1], [1, -1]] is indefinite
    let a = CsrMatrix::from_dense(2, &[2.0, 1.0, 1.0, -1.0]);
    let mut x = vec![3.0, 0.0];
    let mut s = SparseLdlt::new();
    s.factorize(&a).unwrap();
    s.solve_in_place(&mut x).unwrap();
    assert!(
        (x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14,
        "{x:?}"
    );
}

#[test]
fn failures_are_reported() {
    let mut s = SparseLdlt::new();
    let mut x = vec![1.0];
    assert!(matches!(
        s.solve_in_place(&mut x),
        Err(Error::LinearSolver(_))
    ));
    let singular = CsrMatrix::from_dense(2, &[1.0, 1.0, 1.0, 1.0]);
    let ok = s
        .factorize(&singular)
        .and_then(|_| s.solve_in_place(&mut [1.0, 0.0]));
    assert!(matches!(ok, Err(Error::LinearSolver(_))), "{ok:?}");
}
