use biphasic::config::RunConfig;
use biphasic::error::exit;
use biphasic_core::mesh::MeshSpec;
use biphasic_core::scenario::{Contact, MeshSource};

const MINIMAL: &str = r#"
[mesh]
shape = "box"
lx_mm = 2.0
ly_mm = 2.0
lz_mm = 1.0
nx = 2
ny = 2
nz = 2

[material]
lambda_mpa = 0.2
mu_mpa = 0.5

[fluid]
permeability_mm4_per_Ns = 1e-2

[time]
dt_s = 6.4
rate_mm_per_s = 2.5e-3
target_strain = 0.01
"#;

#[test]
fn defaults_fill_optional_sections() {
    let cfg = RunConfig::parse(MINIMAL, &[]).unwrap();
    assert!(!cfg.simulation.gls_enabled);
    assert_eq!(cfg.simulation.contact, Contact::Frictionless);
    assert_eq!(cfg.newton.tangent_reuse, Some(0.1));
    assert_eq!(cfg.output.vtk_every, 1);
    assert_eq!(cfg.simulation.permeability.k, 1e-2);
}

#[test]
fn serialized_config_round_trips() {
    let mut cfg = RunConfig::cartilage_default();
    cfg.simulation.gls_enabled = true;
    cfg.simulation.contact = Contact::Tied;
    cfg.newton.tangent_reuse = None;
    cfg.output.vtk_every = 3;
    let back = RunConfig::parse(&cfg.to_toml(), &[]).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn shipped_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/cartilage.toml");
    let cfg = RunConfig::load(path.as_ref(), &[]).unwrap();
    assert_eq!(cfg.simulation, {
        let mut s = RunConfig::cartilage_default().simulation;
        s.mesh = cfg.simulation.mesh.clone();
        s
    });
    match &cfg.simulation.mesh {
        MeshSource::Generate(MeshSpec::QuarterCylinder(q)) => {
            assert_eq!((q.nc, q.nr, q.nz), (8, 7, 5))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn overrides_replace_values_and_conflicting_keys() {
    let cfg = RunConfig::cartilage_default();
    let o = cfg
        .with_overrides(&[
            "fluid.permeability_mm4_per_Ns=5e-3".into(),
            "mesh.level=2".into(),
            "stabilization.gls_enabled=true".into(),
            "output.dir=elsewhere".into(),
        ])
        .unwrap();
    assert_eq!(o.simulation.permeability.k, 5e-3);
    assert!(o.simulation.gls_enabled);
    assert_eq!(o.output.dir.to_str(), Some("elsewhere"));
    match &o.simulation.mesh {
        MeshSource::Generate(MeshSpec::QuarterCylinder(q)) => {
            assert_eq!((q.nc, q.nr, q.nz), (10, 8, 7))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn wrong_unit_suffix_is_named() {
    let text = MINIMAL.replace("permeability_mm4_per_Ns", "permeability_m4_per_Ns");
    let err = RunConfig::parse(&text, &[]).unwrap_err();
    let msg = err.to_string();
    assert!(
        msg.contains("unit mismatch") && msg.contains("permeability_mm4_per_Ns"),
        "{msg}"
    );
    assert_eq!(err.exit_code(), exit::CONFIG);

    let err = RunConfig::parse(MINIMAL, &["time.dt_ms=5".into()]).unwrap_err();
    assert!(err.to_string().contains("time.dt_s"));
}

#[test]
fn invalid_values_are_rejected() {
    for o in [
        "fluid.permeability_mm4_per_Ns=-1e-3",
        "material.mu_mpa=0",
        "time.dt_s=0",
        "time.target_strain=1.5",
        "solver.tangent_reuse=2",
        "mesh.nx=0",
        "boundary.contact=\"glued\"",
        "stabilization.gls=true",
        "extra.key=1",
        "no_equals_sign",
    ] {
        let err = RunConfig::parse(MINIMAL, &[o.into()]).unwrap_err();
        assert_eq!(err.exit_code(), exit::CONFIG, "{o}: {err}");
    }
}

#[test]
fn missing_required_key_is_named() {
    let text = MINIMAL.replace("mu_mpa = 0.5", "");
    assert!(RunConfig::parse(&text, &[])
        .unwrap_err()
        .to_string()
        .contains("mu_mpa"));
}

#[test]
fn relative_mesh_path_is_resolved_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = MINIMAL.replace("shape = \"box\"", "path = \"meshes/a.mesh\"");
    let text: String = text
        .lines()
        .filter(|l| {
            !["lx_mm", "ly_mm", "lz_mm", "nx", "ny", "nz"]
                .iter()
                .any(|k| l.starts_with(k))
        })
        .map(|l| format!("{l}\n"))
        .collect();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let cfg = RunConfig::load(&path, &[]).unwrap();
    assert_eq!(
        cfg.simulation.mesh,
        MeshSource::File(dir.path().join("meshes/a.mesh").to_string_lossy().into())
    );
}

#[test]
fn unreadable_config_is_a_config_error() {
    let err = RunConfig::load("/nonexistent/run.toml".as_ref(), &[]).unwrap_err();
    assert_eq!(err.exit_code(), exit::CONFIG);
}
