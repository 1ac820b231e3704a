//! Triangulated domains with a Dirichlet/Neumann boundary partition.
//!
//! Edge ids are stable: edges are numbered in lexicographic order of
//! `(min vertex, max vertex)`. Cracks are sets of interior edges (see
//! [`CrackSet`]); the DOF space of a cracked mesh is built by [`build_dofmap`].

mod crack;
mod dofmap;
mod extensions;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::util::distance;

pub use crack::{crack_components, crack_length, CrackSet};
pub use dofmap::{build_dofmap, DofMap};
pub use extensions::{admissible_extensions, ExtensionPolicy};

pub type EdgeId = usize;
pub type Point = [f64; 2];

/// Side of a rectangular domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            other => Err(Error::Invalid(format!("unknown side `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// One incident triangle for boundary edges, two for interior edges.
    pub triangles: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles.len() == 1
    }

    pub fn other(&self, v: usize) -> usize {
        if self.vertices[0] == v {
            self.vertices[1]
        } else {
            self.vertices[0]
        }
    }
}

/// Immutable triangulation plus the derived adjacency and P1 geometry.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    boundary_tags: BTreeMap<EdgeId, BoundaryTag>,
    diameter: f64,
    vertex_edges: Vec<Vec<EdgeId>>,
    vertex_triangles: Vec<Vec<usize>>,
    on_boundary: Vec<bool>,
    areas: Vec<f64>,
    // gradients of the three barycentric basis functions per triangle
    grads: Vec<[[f64; 2]; 3]>,
    fingerprint: u64,
}

const ANGLE_EPS: f64 = 1e-12;

impl Mesh {
    /// Builds a mesh from raw vertices and triangles; `tag` assigns a
    /// boundary condition to every boundary edge (given by its vertex pair).
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tag: impl Fn([usize; 2]) -> BoundaryTag,
    ) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let nv = vertices.len();
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let twice = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if twice <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} has nonpositive signed area")));
            }
            let p = [a, b, c];
            for k in 0..3 {
                let u = sub(p[(k + 1) % 3], p[k]);
                let w = sub(p[(k + 2) % 3], p[k]);
                if u[0] * w[0] + u[1] * w[1] < -ANGLE_EPS * (norm(u) * norm(w)) {
                    return Err(Error::InvalidMesh(format!("triangle {t} is obtuse")));
                }
            }
            let mut g = [[0.0; 2]; 3];
            for k in 0..3 {
                let q1 = p[(k + 1) % 3];
                let q2 = p[(k + 2) % 3];
                g[k] = [(q1[1] - q2[1]) / twice, (q2[0] - q1[0]) / twice];
            }
            areas.push(0.5 * twice);
            grads.push(g);
        }

        let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        for ((a, b), tris) in edge_map {
            if tris.len() > 2 {
                return Err(Error::InvalidMesh(format!("edge ({a},{b}) has {} triangles", tris.len())));
            }
            edges.push(Edge { vertices: [a, b], triangles: tris });
        }

        let mut vertex_edges = vec![Vec::new(); nv];
        let mut on_boundary = vec![false; nv];
        let mut boundary_tags = BTreeMap::new();
        for (id, e) in edges.iter().enumerate() {
            for &v in &e.vertices {
                vertex_edges[v].push(id);
            }
            if e.is_boundary() {
                on_boundary[e.vertices[0]] = true;
                on_boundary[e.vertices[1]] = true;
                boundary_tags.insert(id, tag(e.vertices));
            }
        }
        let mut vertex_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_triangles[v].push(t);
            }
        }
        if let Some(v) = vertex_triangles.iter().position(Vec::is_empty) {
            return Err(Error::InvalidMesh(format!("vertex {v} belongs to no triangle")));
        }

        let boundary_vertices: Vec<Point> = (0..nv).filter(|&v| on_boundary[v]).map(|v| vertices[v]).collect();
        let mut diameter = 0.0f64;
        for (i, p) in boundary_vertices.iter().enumerate() {
            for q in &boundary_vertices[i + 1..] {
                diameter = diameter.max(distance(*p, *q));
            }
        }

        let mut hasher = Sha256::new();
        for p in &vertices {
            hasher.update(p[0].to_le_bytes());
            hasher.update(p[1].to_le_bytes());
        }
        for tri in &triangles {
            for v in tri {
                hasher.update((*v as u64).to_le_bytes());
            }
        }
        for (id, tag) in &boundary_tags {
            hasher.update((*id as u64).to_le_bytes());
            hasher.update([matches!(tag, BoundaryTag::Dirichlet) as u8]);
        }
        let digest = hasher.finalize();
        let fingerprint = u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"));

        Ok(Self {
            vertices,
            triangles,
            edges,
            boundary_tags,
            diameter,
            vertex_edges,
            vertex_triangles,
            on_boundary,
            areas,
            grads,
            fingerprint,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Result<&Edge> {
        self.edges.get(id).ok_or(Error::UnknownEdge(id))
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn boundary_tags(&self) -> &BTreeMap<EdgeId, BoundaryTag> {
        &self.boundary_tags
    }

    pub fn boundary_tag(&self, id: EdgeId) -> Option<BoundaryTag> {
        self.boundary_tags.get(&id).copied()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn vertex_edges(&self, v: usize) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn basis_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.grads[t]
    }

    pub fn edge_length(&self, id: EdgeId) -> f64 {
        let [a, b] = self.edges[id].vertices;
        distance(self.vertices[a], self.vertices[b])
    }

    pub fn edge_segment(&self, id: EdgeId) -> [Point; 2] {
        let [a, b] = self.edges[id].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    /// Edge id of the vertex pair, if the pair is an edge.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<EdgeId> {
        self.vertex_edges.get(a)?.iter().copied().find(|&e| self.edges[e].other(a) == b)
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| !self.edges[e].is_boundary())
    }

    /// Lumped (diagonal) mass of each vertex on the uncracked mesh.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                mass[v] += self.areas[t] / 3.0;
            }
        }
        mass
    }

    /// Dirichlet integral `(∇a|∇b)` of two nodal fields on the uncracked mesh.
    pub fn stiffness_product(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            let ga = self.gradient(t, tri.map(|v| a[v]));
            let gb = self.gradient(t, tri.map(|v| b[v]));
            acc += self.areas[t] * (ga[0] * gb[0] + ga[1] * gb[1]);
        }
        acc
    }

    /// Lumped-mass L² product of two nodal fields on the uncracked mesh.
    pub fn mass_product(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            let w = self.areas[t] / 3.0;
            for &v in tri {
                acc += w * a[v] * b[v];
            }
        }
        acc
    }

    /// Gradient on triangle `t` of the P1 function with the given corner values.
    pub fn gradient(&self, t: usize, corner_values: [f64; 3]) -> [f64; 2] {
        let g = &self.grads[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += corner_values[k] * g[k][0];
            out[1] += corner_values[k] * g[k][1];
        }
        out
    }

    /// Samples `f` at every vertex.
    pub fn nodal(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.vertices.iter().map(|&p| f(p)).collect()
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            edges: self.edges.iter().map(|e| e.vertices).collect(),
            boundary: self.boundary_tags.iter().map(|(&edge, &tag)| BoundaryEntry { edge, tag }).collect(),
        }
    }

    pub fn from_json(json: &MeshJson) -> Result<Self> {
        let tags: HashMap<[usize; 2], BoundaryTag> = json
            .boundary
            .iter()
            .filter_map(|b| json.edges.get(b.edge).map(|e| ([e[0].min(e[1]), e[0].max(e[1])], b.tag)))
            .collect();
        let missing = std::cell::Cell::new(false);
        let mesh = Mesh::new(json.vertices.clone(), json.triangles.clone(), |e| {
            tags.get(&e).copied().unwrap_or_else(|| {
                missing.set(true);
                BoundaryTag::Neumann
            })
        })?;
        if missing.get() || tags.len() != mesh.boundary_tags.len() {
            return Err(Error::InvalidMesh("boundary tags do not cover exactly the boundary edges".into()));
        }
        if mesh.to_json().edges != json.edges {
            return Err(Error::InvalidMesh("edge list is not in canonical order".into()));
        }
        Ok(mesh)
    }
}

/// Serialized mesh. Edge ids index `edges`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<[usize; 2]>,
    pub boundary: Vec<BoundaryEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub edge: EdgeId,
    pub tag: BoundaryTag,
}

/// Structured right-triangle mesh of `[0,width] × [0,height]`. Every grid
/// cell is split along its lower-left to upper-right diagonal.
pub fn build_rect_mesh(width: f64, height: f64, nx: usize, ny: usize, dirichlet_sides: &[Side]) -> Result<Mesh> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(Error::InvalidMesh(format!("dimensions must be positive, got {width} × {height}")));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh("nx and ny must be at least 1".into()));
    }
    if dirichlet_sides.is_empty() {
        return Err(Error::InvalidMesh("at least one Dirichlet side is required".into()));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let side_of = |v: usize| -> Vec<Side> {
        let (i, j) = (v % (nx + 1), v / (nx + 1));
        let mut s = Vec::new();
        if i == 0 {
            s.push(Side::Left);
        }
        if i == nx {
            s.push(Side::Right);
        }
        if j == 0 {
            s.push(Side::Bottom);
        }
        if j == ny {
            s.push(Side::Top);
        }
        s
    };
    Mesh::new(vertices, triangles, |[a, b]| {
        let (sa, sb) = (side_of(a), side_of(b));
        let shared = sa.iter().find(|s| sb.contains(s));
        match shared {
            Some(s) if dirichlet_sides.contains(s) => BoundaryTag::Dirichlet,
            _ => BoundaryTag::Neumann,
        }
    })
}

fn sub(a: Point, b: Point) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}
