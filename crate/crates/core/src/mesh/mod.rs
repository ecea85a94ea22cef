//! Ten-node tetrahedral meshes with named boundary facet and node sets.

mod generate;
mod geometry;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use generate::{
    generate_box, generate_quarter_cylinder, BoxSpec, MeshSpec, QuarterCylinderSpec,
};
pub use geometry::{circumsphere_radius, signed_volume, tet10_volume, EPS_VOLUME};

use crate::element::{TET10_EDGES, TRI6_EDGES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: usize,
    /// mm
    pub coords: [f64; 3],
}

/// Quadratic tetrahedron. `nodes[..4]` are corners, `nodes[4 + e]` is the
/// midside node of edge `TET10_EDGES[e]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tet10 {
    pub nodes: [usize; 10],
    pub region: i32,
}

impl Tet10 {
    pub fn corners(&self) -> [usize; 4] {
        [self.nodes[0], self.nodes[1], self.nodes[2], self.nodes[3]]
    }
}

/// Six-node boundary triangle: corners first, then midside nodes of
/// `(0,1)`, `(1,2)`, `(2,0)`. Corners are ordered with the normal pointing
/// out of the domain.
pub type Facet = [usize; 6];

/// Outward-oriented corner faces of a positively oriented tetrahedron.
pub const TET_FACES: [[usize; 3]; 4] = [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vertex>,
    pub elements: Vec<Tet10>,
    pub facet_sets: BTreeMap<String, Vec<Facet>>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
}

/// Straight line through `point` along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: [f64; 3],
    pub direction: [f64; 3],
}

impl Line {
    /// The z-parallel line through `(x, y)`.
    pub fn vertical(x: f64, y: f64) -> Self {
        Self {
            point: [x, y, 0.0],
            direction: [0.0, 0.0, 1.0],
        }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn coords(&self, node: usize) -> [f64; 3] {
        self.vertices[node].coords
    }

    pub fn element_nodes(&self, e: usize) -> [[f64; 3]; 10] {
        let el = &self.elements[e];
        core::array::from_fn(|a| self.vertices[el.nodes[a]].coords)
    }

    pub fn element_corners(&self, e: usize) -> [[f64; 3]; 4] {
        let el = &self.elements[e];
        core::array::from_fn(|a| self.vertices[el.nodes[a]].coords)
    }

    /// `true` for nodes that are a corner of some element (these carry the
    /// pressure unknowns).
    pub fn corner_flags(&self) -> Vec<bool> {
        let mut flags = alloc::vec![false; self.num_nodes()];
        for el in &self.elements {
            for n in el.corners() {
                flags[n] = true;
            }
        }
        flags
    }

    /// Circumsphere radius of every element's corner tetrahedron.
    pub fn element_sizes(&self) -> Result<Vec<f64>> {
        (0..self.elements.len())
            .map(|e| circumsphere_radius(&self.element_corners(e)))
            .collect()
    }

    /// Sum of isoparametric element volumes.
    pub fn volume(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| tet10_volume(&self.element_nodes(e)))
            .sum()
    }

    pub fn facet_set(&self, name: &str) -> Result<&[Facet]> {
        self.facet_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("facet set '{name}' does not exist")))
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("node set '{name}' does not exist")))
    }

    /// Sorted, unique nodes of a facet set.
    pub fn facet_set_nodes(&self, name: &str) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = self.facet_set(name)?.iter().flatten().copied().collect();
        Ok(set.into_iter().collect())
    }

    /// Corner nodes of a facet set, sorted.
    pub fn facet_set_corner_nodes(&self, name: &str) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = self
            .facet_set(name)?
            .iter()
            .flat_map(|f| f[..3].iter().copied())
            .collect();
        Ok(set.into_iter().collect())
    }

    /// Faces that belong to exactly one element, keyed by sorted corner ids.
    fn boundary_faces(&self) -> BTreeMap<[usize; 3], (usize, [usize; 3])> {
        let mut faces: BTreeMap<[usize; 3], (usize, [usize; 3], u32)> = BTreeMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for f in TET_FACES {
                let tri = [el.nodes[f[0]], el.nodes[f[1]], el.nodes[f[2]]];
                let mut key = tri;
                key.sort_unstable();
                faces
                    .entry(key)
                    .and_modify(|v| v.2 += 1)
                    .or_insert((e, tri, 1));
            }
        }
        faces
            .into_iter()
            .filter(|(_, v)| v.2 == 1)
            .map(|(k, v)| (k, (v.0, v.1)))
            .collect()
    }

    /// Checks every structural invariant; errors name the offending entity.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(Error::Validation(format!(
                    "vertex ids must be dense: position {i} has id {}",
                    v.id
                )));
            }
            if !v.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::Validation(format!(
                    "vertex {i} has non-finite coordinates"
                )));
            }
        }
        let mut used = alloc::vec![false; n];
        for (e, el) in self.elements.iter().enumerate() {
            for &node in &el.nodes {
                if node >= n {
                    return Err(Error::Validation(format!(
                        "element {e} references missing node {node}"
                    )));
                }
                used[node] = true;
            }
            let distinct: BTreeSet<usize> = el.nodes.iter().copied().collect();
            if distinct.len() != 10 {
                return Err(Error::Validation(format!("element {e} repeats a node")));
            }
            let vol = signed_volume(&self.element_corners(e));
            if !(vol > EPS_VOLUME) {
                return Err(Error::Validation(format!(
                    "element {e} has non-positive corner volume {vol:e}"
                )));
            }
            for (k, &(a, b)) in TET10_EDGES.iter().enumerate() {
                let pa = self.coords(el.nodes[a]);
                let pb = self.coords(el.nodes[b]);
                let pm = self.coords(el.nodes[4 + k]);
                let len2: f64 = (0..3).map(|d| (pb[d] - pa[d]) * (pb[d] - pa[d])).sum();
                let off2: f64 = (0..3)
                    .map(|d| {
                        let o = pm[d] - 0.5 * (pa[d] + pb[d]);
                        o * o
                    })
                    .sum();
                // curved-boundary nodes may sit off the chord, but never far
                if off2 > 0.01 * len2 {
                    return Err(Error::Validation(format!(
                        "element {e}: midside node {} is too far from its edge",
                        el.nodes[4 + k]
                    )));
                }
            }
        }
        if let Some(orphan) = used.iter().position(|u| !u) {
            return Err(Error::Validation(format!(
                "node {orphan} belongs to no element"
            )));
        }
        let boundary = self.boundary_faces();
        let edge_mid = self.edge_midpoints();
        for (name, facets) in &self.facet_sets {
            for (i, f) in facets.iter().enumerate() {
                let mut key = [f[0], f[1], f[2]];
                key.sort_unstable();
                if !boundary.contains_key(&key) {
                    return Err(Error::Validation(format!(
                        "facet {i} of set '{name}' is not a boundary face of exactly one element"
                    )));
                }
                for (k, &(a, b)) in TRI6_EDGES.iter().enumerate() {
                    if edge_mid.get(&edge_key(f[a], f[b])) != Some(&f[3 + k]) {
                        return Err(Error::Validation(format!(
                            "facet {i} of set '{name}' has inconsistent midside node"
                        )));
                    }
                }
            }
        }
        for (name, nodes) in &self.node_sets {
            if let Some(bad) = nodes.iter().find(|&&v| v >= n) {
                return Err(Error::Validation(format!(
                    "node set '{name}' references missing node {bad}"
                )));
            }
        }
        Ok(())
    }

    fn edge_midpoints(&self) -> BTreeMap<(usize, usize), usize> {
        let mut map = BTreeMap::new();
        for el in &self.elements {
            for (k, &(a, b)) in TET10_EDGES.iter().enumerate() {
                map.insert(edge_key(el.nodes[a], el.nodes[b]), el.nodes[4 + k]);
            }
        }
        map
    }

    /// Node ids within `tol` of `line`, ordered by their coordinate along it.
    pub fn reference_line_nodes(&self, line: &Line, tol: f64) -> Result<Vec<usize>> {
        let dir = geometry::v3(&line.direction);
        let len = dir.norm();
        if !(len > 0.0) || !(tol >= 0.0) {
            return Err(Error::Query(format!(
                "invalid line query (|direction| = {len}, tol = {tol})"
            )));
        }
        let dir = dir / len;
        let origin = geometry::v3(&line.point);
        let mut hits: Vec<(f64, usize)> = self
            .vertices
            .iter()
            .filter_map(|v| {
                let rel = geometry::v3(&v.coords) - origin;
                let t = rel.dot(&dir);
                let dist = (rel - dir * t).norm();
                (dist <= tol).then_some((t, v.id))
            })
            .collect();
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        hits.dedup_by_key(|h| h.1);
        if hits.len() < 2 {
            return Err(Error::Query(format!(
                "fewer than two nodes within {tol} mm of the line through {:?}",
                line.point
            )));
        }
        Ok(hits.into_iter().map(|h| h.1).collect())
    }

    /// Axial coordinate of `node` along `line` (distance from `line.point`).
    pub fn line_coordinate(&self, line: &Line, node: usize) -> f64 {
        let dir = geometry::v3(&line.direction).normalize();
        (geometry::v3(&self.coords(node)) - geometry::v3(&line.point)).dot(&dir)
    }

    /// Number of element edges traversed by the line: consecutive pairs of
    /// corner nodes among `line_nodes`.
    pub fn elements_on_line(&self, line_nodes: &[usize]) -> usize {
        let corners = self.corner_flags();
        line_nodes
            .iter()
            .filter(|&&n| corners[n])
            .count()
            .saturating_sub(1)
    }
}
