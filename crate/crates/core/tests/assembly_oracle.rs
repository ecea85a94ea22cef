use biphasic_core::material::{NeoHookeParams, PermeabilityParams};
use biphasic_core::mesh::{generate_box, BoxSpec, Mesh};
use biphasic_core::oracle::{dense_assembly_oracle, DENSE_ORACLE_MAX_DOFS};
use biphasic_core::solver::{Discretization, SolutionState};
use biphasic_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOLID: NeoHookeParams = NeoHookeParams {
    lambda: 0.2,
    mu: 0.5,
};

/// Two-cell box with corner nodes jittered and midside nodes recentred.
fn jittered_mesh(rng: &mut ChaCha8Rng) -> Mesh {
    let mut mesh = generate_box(&BoxSpec {
        lengths: [2.0, 1.0, 1.0],
        cells: [2, 1, 1],
    })
    .unwrap();
    let corners = mesh.corner_flags();
    for (v, corner) in mesh.vertices.iter_mut().zip(&corners) {
        if *corner {
            for c in &mut v.coords {
                *c += rng.gen_range(-0.08..0.08);
            }
        }
    }
    for e in 0..mesh.elements.len() {
        let nodes = mesh.elements[e].nodes;
        for (k, (a, b)) in [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)]
            .into_iter()
            .enumerate()
        {
            let (pa, pb) = (
                mesh.vertices[nodes[a]].coords,
                mesh.vertices[nodes[b]].coords,
            );
            mesh.vertices[nodes[4 + k]].coords = core::array::from_fn(|i| 0.5 * (pa[i] + pb[i]));
        }
    }
    mesh.validate().unwrap();
    mesh
}

fn random_state(rng: &mut ChaCha8Rng, n_u: usize, n_p: usize, scale: f64) -> SolutionState {
    SolutionState {
        u: (0..n_u).map(|_| rng.gen_range(-scale..scale)).collect(),
        p: (0..n_p).map(|_| rng.gen_range(-0.01..0.01)).collect(),
        t: 0.0,
    }
}

fn max_difference(mesh: &Mesh, gls: bool, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm = PermeabilityParams { k: 5e-3 };
    let dt = 2.0;
    let disc = Discretization::new(mesh, SOLID, perm, gls).unwrap();
    let (nu, np) = (disc.dofs.num_u(), disc.dofs.num_p());
    let state = random_state(&mut rng, nu, np, 0.03);
    let prev = random_state(&mut rng, nu, np, 0.03);
    let sys = disc.assemble(&state, &prev, dt).unwrap();
    let dense =
        dense_assembly_oracle(mesh, &state.u, &prev.u, &state.p, &SOLID, &perm, gls, dt).unwrap();
    assert_eq!(dense.n, disc.dofs.total());
    let a = sys.matrix.to_dense();
    let mut worst: f64 = 0.0;
    for (x, y) in a
        .iter()
        .zip(&dense.matrix)
        .chain(sys.residual.iter().zip(&dense.residual))
    {
        worst = worst.max((x - y).abs());
    }
    worst
}

#[test]
fn sparse_assembly_matches_dense_oracle_on_random_meshes() {
    for seed in 0..4 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mesh = jittered_mesh(&mut rng);
        for gls in [false, true] {
            let d = max_difference(&mesh, gls, seed);
            assert!(d < 1e-14, "seed {seed}, gls {gls}: {d:e}");
        }
    }
}

#[test]
fn assembled_matrix_is_symmetric_with_and_without_gls() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mesh = jittered_mesh(&mut rng);
    for gls in [false, true] {
        let disc = Discretization::new(&mesh, SOLID, PermeabilityParams { k: 1e-3 }, gls).unwrap();
        let state = random_state(&mut rng, disc.dofs.num_u(), disc.dofs.num_p(), 0.03);
        let prev = random_state(&mut rng, disc.dofs.num_u(), disc.dofs.num_p(), 0.03);
        let sys = disc.assemble(&state, &prev, 6.4).unwrap();
        assert!(sys.matrix.symmetry_defect() < 1e-12);
    }
}

#[test]
fn dense_oracle_refuses_large_meshes() {
    let mesh = generate_box(&BoxSpec {
        lengths: [1.0; 3],
        cells: [3, 3, 3],
    })
    .unwrap();
    let n = 3 * mesh.num_nodes();
    assert!(n > DENSE_ORACLE_MAX_DOFS);
    let u = vec![0.0; n];
    let err = dense_assembly_oracle(
        &mesh,
        &u,
        &u,
        &[],
        &SOLID,
        &PermeabilityParams { k: 1e-3 },
        false,
        1.0,
    );
    assert!(matches!(err, Err(Error::Refused(_))));
}
