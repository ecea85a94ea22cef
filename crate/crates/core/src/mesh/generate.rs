//! Structured generators: a 2D triangulation extruded into prisms, each prism
//! split into three tetrahedra by the minimum-vertex-index rule so that the
//! diagonals of shared quadrilateral faces always agree.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{edge_key, signed_volume, Facet, Mesh, Tet10, Vertex};
use crate::element::{TET10_EDGES, TRI6_EDGES};
use crate::error::{Error, Result};
use crate::math::{cos, sin, sqrt};

/// Axis-aligned box `[0, lx] × [0, ly] × [0, lz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    /// mm
    pub lengths: [f64; 3],
    pub cells: [usize; 3],
}

/// Quarter cylinder `x ≥ 0, y ≥ 0, x² + y² ≤ R², 0 ≤ z ≤ H`.
///
/// The cross-section is a square core of side `R/2` with `nc × nc` cells and
/// two mapped blocks of `nr` radial layers joining it to the arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterCylinderSpec {
    /// mm
    pub radius: f64,
    /// mm
    pub height: f64,
    pub nc: usize,
    pub nr: usize,
    pub nz: usize,
}

impl QuarterCylinderSpec {
    /// Resolutions whose axial element counts (5, 7, 9, 12) match the four
    /// reference meshes of the compression study; `level` is 1-based.
    pub fn reference(level: usize, radius: f64, height: f64) -> Result<Self> {
        let (nc, nr, nz) = match level {
            1 => (8, 7, 5),
            2 => (10, 8, 7),
            3 => (13, 12, 9),
            4 => (17, 14, 12),
            _ => {
                return Err(Error::Config(format!(
                    "reference mesh level must be 1..=4, got {level}"
                )))
            }
        };
        Ok(Self {
            radius,
            height,
            nc,
            nr,
            nz,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    Box(BoxSpec),
    QuarterCylinder(QuarterCylinderSpec),
}

impl BoxSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in ["lx", "ly", "lz"].iter().zip(self.lengths) {
            check_length(name, v)?;
        }
        for (name, v) in ["cells in x", "cells in y", "cells in z"]
            .iter()
            .zip(self.cells)
        {
            check_count(name, v)?;
        }
        Ok(())
    }
}

impl QuarterCylinderSpec {
    pub fn validate(&self) -> Result<()> {
        check_length("radius", self.radius)?;
        check_length("height", self.height)?;
        check_count("core cells (nc)", self.nc)?;
        check_count("radial layers (nr)", self.nr)?;
        check_count("axial layers (nz)", self.nz)
    }
}

impl MeshSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MeshSpec::Box(s) => s.validate(),
            MeshSpec::QuarterCylinder(s) => s.validate(),
        }
    }

    pub fn generate(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Box(s) => generate_box(s),
            MeshSpec::QuarterCylinder(s) => generate_quarter_cylinder(s),
        }
    }
}

fn check_length(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_count(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be at least 1")))
    }
}

/// Planar triangulation used as the extrusion profile.
struct Plane {
    points: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl Plane {
    /// Splits quad `(a, b, c, d)` (cyclic order) along its shorter diagonal.
    fn push_quad(&mut self, q: [usize; 4]) {
        let d2 = |i: usize, j: usize| {
            let (p, r) = (self.points[q[i]], self.points[q[j]]);
            (p[0] - r[0]) * (p[0] - r[0]) + (p[1] - r[1]) * (p[1] - r[1])
        };
        if d2(1, 3) < d2(0, 2) * (1.0 - 1e-9) {
            self.triangles.push([q[0], q[1], q[3]]);
            self.triangles.push([q[1], q[2], q[3]]);
        } else {
            self.triangles.push([q[0], q[1], q[2]]);
            self.triangles.push([q[0], q[2], q[3]]);
        }
    }
}

const PRISM_ROTATIONS: [[usize; 6]; 6] = [
    [0, 1, 2, 3, 4, 5],
    [1, 2, 0, 4, 5, 3],
    [2, 0, 1, 5, 3, 4],
    [3, 5, 4, 0, 2, 1],
    [4, 3, 5, 1, 0, 2],
    [5, 4, 3, 2, 1, 0],
];

/// Three tetrahedra of prism `v` (bottom triangle 0,1,2 below 3,4,5).
fn split_prism(v: [usize; 6]) -> [[usize; 4]; 3] {
    let first = (0..6).min_by_key(|&i| v[i]).unwrap_or(0);
    let r = PRISM_ROTATIONS[first].map(|i| v[i]);
    if r[1].min(r[5]) < r[2].min(r[4]) {
        [
            [r[0], r[1], r[2], r[5]],
            [r[0], r[1], r[5], r[4]],
            [r[0], r[4], r[5], r[3]],
        ]
    } else {
        [
            [r[0], r[1], r[2], r[4]],
            [r[0], r[4], r[2], r[5]],
            [r[0], r[4], r[5], r[3]],
        ]
    }
}

type Classifier<'c> = dyn Fn(&[[f64; 3]; 3]) -> Option<&'static str> + 'c;

/// Extrudes `plane` through `z_levels`, inserts midside nodes and tags the
/// boundary. `snap` may move a midside node given its edge end points.
fn extrude(
    plane: &Plane,
    z_levels: &[f64],
    snap: &dyn Fn([f64; 3], [f64; 3], [f64; 3]) -> [f64; 3],
    classify: &Classifier<'_>,
) -> Result<Mesh> {
    let n2 = plane.points.len();
    let mut coords: Vec<[f64; 3]> = Vec::with_capacity(n2 * z_levels.len());
    for &z in z_levels {
        coords.extend(plane.points.iter().map(|p| [p[0], p[1], z]));
    }

    let mut corner_tets = Vec::with_capacity(3 * plane.triangles.len() * (z_levels.len() - 1));
    for layer in 0..z_levels.len() - 1 {
        let (lo, hi) = (layer * n2, (layer + 1) * n2);
        for t in &plane.triangles {
            let prism = [
                t[0] + lo,
                t[1] + lo,
                t[2] + lo,
                t[0] + hi,
                t[1] + hi,
                t[2] + hi,
            ];
            for mut tet in split_prism(prism) {
                let c = tet.map(|n| coords[n]);
                let vol = signed_volume(&c);
                if vol.abs() <= super::EPS_VOLUME {
                    return Err(Error::Geometry(format!(
                        "generator produced a degenerate tetrahedron in layer {layer}"
                    )));
                }
                if vol < 0.0 {
                    tet.swap(1, 2);
                }
                corner_tets.push(tet);
            }
        }
    }

    let mut midside: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut elements = Vec::with_capacity(corner_tets.len());
    for tet in &corner_tets {
        let mut nodes = [0usize; 10];
        nodes[..4].copy_from_slice(tet);
        for (e, &(a, b)) in TET10_EDGES.iter().enumerate() {
            let key = edge_key(tet[a], tet[b]);
            let id = *midside.entry(key).or_insert_with(|| {
                let (pa, pb) = (coords[key.0], coords[key.1]);
                let mid = [0, 1, 2].map(|d| 0.5 * (pa[d] + pb[d]));
                coords.push(snap(pa, pb, mid));
                coords.len() - 1
            });
            nodes[4 + e] = id;
        }
        elements.push(Tet10 { nodes, region: 0 });
    }

    let vertices = coords
        .into_iter()
        .enumerate()
        .map(|(id, coords)| Vertex { id, coords })
        .collect();
    let mut mesh = Mesh {
        vertices,
        elements,
        facet_sets: BTreeMap::new(),
        node_sets: BTreeMap::new(),
    };

    let mut sets: BTreeMap<String, Vec<Facet>> = BTreeMap::new();
    for (_, (e, tri)) in mesh.boundary_faces() {
        let corners = tri.map(|n| mesh.coords(n));
        let name = classify(&corners).ok_or_else(|| {
            Error::Geometry(format!(
                "boundary face of element {e} at {:?} matches no boundary",
                corners[0]
            ))
        })?;
        let mut facet = [0usize; 6];
        facet[..3].copy_from_slice(&tri);
        for (k, &(a, b)) in TRI6_EDGES.iter().enumerate() {
            facet[3 + k] = midside[&edge_key(tri[a], tri[b])];
        }
        sets.entry(name.into()).or_default().push(facet);
    }
    mesh.facet_sets = sets;
    let names: Vec<String> = mesh.facet_sets.keys().cloned().collect();
    for name in names {
        let nodes = mesh.facet_set_nodes(&name)?;
        mesh.node_sets.insert(name, nodes);
    }
    Ok(mesh)
}

fn levels(length: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                length
            } else {
                length * i as f64 / n as f64
            }
        })
        .collect()
}

pub fn generate_box(spec: &BoxSpec) -> Result<Mesh> {
    spec.validate()?;
    let [lx, ly, lz] = spec.lengths;
    let [nx, ny, nz] = spec.cells;
    let xs = levels(lx, nx);
    let ys = levels(ly, ny);
    let mut plane = Plane {
        points: Vec::with_capacity((nx + 1) * (ny + 1)),
        triangles: Vec::new(),
    };
    for &y in &ys {
        for &x in &xs {
            plane.points.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    for j in 0..ny {
        for i in 0..nx {
            plane.push_quad([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }

    let tol = 1e-9 * lx.max(ly).max(lz);
    let on = |c: &[[f64; 3]; 3], d: usize, v: f64| c.iter().all(|p| (p[d] - v).abs() <= tol);
    let classify = move |c: &[[f64; 3]; 3]| -> Option<&'static str> {
        if on(c, 2, lz) {
            Some("top")
        } else if on(c, 2, 0.0) {
            Some("bottom")
        } else if on(c, 0, 0.0) {
            Some("x0")
        } else if on(c, 0, lx) {
            Some("x1")
        } else if on(c, 1, 0.0) {
            Some("y0")
        } else if on(c, 1, ly) {
            Some("y1")
        } else {
            None
        }
    };
    extrude(&plane, &levels(lz, nz), &|_, _, m| m, &classify)
}

pub fn generate_quarter_cylinder(spec: &QuarterCylinderSpec) -> Result<Mesh> {
    spec.validate()?;
    let QuarterCylinderSpec {
        radius: r_out,
        height,
        nc,
        nr,
        nz,
    } = *spec;
    let a = 0.5 * r_out;
    let frac = |i: usize, n: usize| i as f64 / n as f64;

    let mut plane = Plane {
        points: Vec::new(),
        triangles: Vec::new(),
    };
    for j in 0..=nc {
        for i in 0..=nc {
            plane.points.push([a * frac(i, nc), a * frac(j, nc)]);
        }
    }
    let core = |i: usize, j: usize| j * (nc + 1) + i;
    let blend = |p_in: [f64; 2], theta: f64, s: f64| {
        let p_out = [r_out * cos(theta), r_out * sin(theta)];
        let mut p = [0.0; 2];
        for d in 0..2 {
            p[d] = (1.0 - s) * p_in[d] + s * p_out[d];
        }
        p
    };

    // block X: beyond the core face x = a, indexed (layer, j)
    let x_start = plane.points.len();
    for layer in 1..=nr {
        for j in 0..=nc {
            let theta = FRAC_PI_4 * frac(j, nc);
            let mut p = blend([a, a * frac(j, nc)], theta, frac(layer, nr));
            if j == 0 {
                p[1] = 0.0;
            }
            plane.points.push(p);
        }
    }
    let bx = |layer: usize, j: usize| {
        if layer == 0 {
            core(nc, j)
        } else {
            x_start + (layer - 1) * (nc + 1) + j
        }
    };
    // block Y: beyond the core face y = a, indexed (layer, i); i = nc is
    // shared with block X
    let y_start = plane.points.len();
    for layer in 1..=nr {
        for i in 0..nc {
            let theta = FRAC_PI_2 - FRAC_PI_4 * frac(i, nc);
            let mut p = blend([a * frac(i, nc), a], theta, frac(layer, nr));
            if i == 0 {
                p[0] = 0.0;
            }
            plane.points.push(p);
        }
    }
    let by = |layer: usize, i: usize| {
        if layer == 0 {
            core(i, nc)
        } else if i == nc {
            bx(layer, nc)
        } else {
            y_start + (layer - 1) * nc + i
        }
    };

    for j in 0..nc {
        for i in 0..nc {
            plane.push_quad([
                core(i, j),
                core(i + 1, j),
                core(i + 1, j + 1),
                core(i, j + 1),
            ]);
        }
    }
    for layer in 0..nr {
        for j in 0..nc {
            plane.push_quad([
                bx(layer, j),
                bx(layer + 1, j),
                bx(layer + 1, j + 1),
                bx(layer, j + 1),
            ]);
        }
        for i in 0..nc {
            plane.push_quad([
                by(layer, i),
                by(layer, i + 1),
                by(layer + 1, i + 1),
                by(layer + 1, i),
            ]);
        }
    }

    let tol = 1e-9 * r_out.max(height);
    let radial = |p: &[f64; 3]| sqrt(p[0] * p[0] + p[1] * p[1]);
    let snap = move |pa: [f64; 3], pb: [f64; 3], m: [f64; 3]| {
        if (radial(&pa) - r_out).abs() <= tol && (radial(&pb) - r_out).abs() <= tol {
            let s = r_out / radial(&m);
            [m[0] * s, m[1] * s, m[2]]
        } else {
            m
        }
    };
    let classify = move |c: &[[f64; 3]; 3]| -> Option<&'static str> {
        let all = |f: &dyn Fn(&[f64; 3]) -> bool| c.iter().all(f);
        if all(&|p| (p[2] - height).abs() <= tol) {
            Some("top")
        } else if all(&|p| p[2].abs() <= tol) {
            Some("bottom")
        } else if all(&|p| p[0].abs() <= tol) {
            Some("sym_x")
        } else if all(&|p| p[1].abs() <= tol) {
            Some("sym_y")
        } else if all(&|p| (radial(p) - r_out).abs() <= tol) {
            Some("lateral")
        } else {
            None
        }
    };
    extrude(&plane, &levels(height, nz), &snap, &classify)
}
