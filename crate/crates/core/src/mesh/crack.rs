use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};

use super::{EdgeId, Mesh};
use crate::error::{Error, Result};
use crate::util::UnionFind;

/// A crack made of whole interior mesh edges.
///
/// Every member is a full edge, so the set never has isolated points. The
/// component count and the length are cached at construction.
#[derive(Clone, Debug, Default)]
pub struct CrackSet {
    edges: Vec<EdgeId>,
    n_components: usize,
    total_length: f64,
}

impl CrackSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mesh: &Mesh, edges: impl IntoIterator<Item = EdgeId>) -> Result<Self> {
        let mut edges: Vec<EdgeId> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        let n_components = crack_components(mesh, &edges)?;
        let total_length = edges.iter().map(|&e| mesh.edge_length(e)).sum();
        Ok(Self { edges, n_components, total_length })
    }

    /// This crack plus `extra` edges.
    pub fn with_edges(&self, mesh: &Mesh, extra: &[EdgeId]) -> Result<Self> {
        Self::new(mesh, self.edges.iter().chain(extra).copied())
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    pub fn is_superset_of(&self, other: &CrackSet) -> bool {
        other.edges.iter().all(|&e| self.contains(e))
    }

    /// Edges of `self` that are not in `base`.
    pub fn difference(&self, base: &CrackSet) -> Vec<EdgeId> {
        self.edges.iter().copied().filter(|&e| !base.contains(e)).collect()
    }

    /// Number of crack edges incident to each crack vertex.
    pub fn vertex_degrees(&self, mesh: &Mesh) -> BTreeMap<usize, usize> {
        let mut deg = BTreeMap::new();
        for &e in &self.edges {
            for v in mesh.edges()[e].vertices {
                *deg.entry(v).or_insert(0) += 1;
            }
        }
        deg
    }

    /// Crack tips: vertices of crack-degree one that lie inside the domain.
    pub fn tips(&self, mesh: &Mesh) -> Vec<usize> {
        self.vertex_degrees(mesh)
            .into_iter()
            .filter(|&(v, d)| d == 1 && !mesh.is_boundary_vertex(v))
            .map(|(v, _)| v)
            .collect()
    }

    pub fn segments(&self, mesh: &Mesh) -> Vec<[super::Point; 2]> {
        self.edges.iter().map(|&e| mesh.edge_segment(e)).collect()
    }
}

impl PartialEq for CrackSet {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl Eq for CrackSet {}

impl Hash for CrackSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.edges.hash(state);
    }
}

impl PartialOrd for CrackSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CrackSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.edges.cmp(&other.edges)
    }
}

/// Serialized as the sorted edge-id array.
impl Serialize for CrackSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.edges.serialize(s)
    }
}

/// Connected components of the graph whose arcs are the given edges.
pub fn crack_components(mesh: &Mesh, edges: &[EdgeId]) -> Result<usize> {
    let mut local: HashMap<usize, usize> = HashMap::new();
    let mut pairs = Vec::with_capacity(edges.len());
    for &e in edges {
        let edge = mesh.edge(e)?;
        if edge.is_boundary() {
            return Err(Error::BoundaryEdge(e));
        }
        let ids = edge.vertices.map(|v| {
            let n = local.len();
            *local.entry(v).or_insert(n)
        });
        pairs.push(ids);
    }
    let mut uf = UnionFind::new(local.len());
    let mut components = local.len();
    for [a, b] in pairs {
        if uf.union(a, b) {
            components -= 1;
        }
    }
    Ok(components)
}

/// ℋ¹ of the crack: the sum of its edge lengths.
pub fn crack_length(mesh: &Mesh, crack: &CrackSet) -> f64 {
    crack.edges.iter().map(|&e| mesh.edge_length(e)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Side};

    fn mesh4() -> Mesh {
        build_rect_mesh(1.0, 1.0, 4, 4, &Side::ALL).unwrap()
    }

    fn h_edge(m: &Mesh, i: usize, j: usize) -> EdgeId {
        // horizontal edge from grid node (i,j) to (i+1,j) on the 4×4 mesh
        m.find_edge(j * 5 + i, j * 5 + i + 1).unwrap()
    }

    #[test]
    fn components() {
        let m = mesh4();
        assert_eq!(crack_components(&m, &[]).unwrap(), 0);
        let path = [h_edge(&m, 0, 2), h_edge(&m, 1, 2), h_edge(&m, 2, 2)];
        assert_eq!(crack_components(&m, &path).unwrap(), 1);
        let apart = [h_edge(&m, 0, 1), h_edge(&m, 2, 3)];
        assert_eq!(crack_components(&m, &apart).unwrap(), 2);
    }

    #[test]
    fn boundary_edge_rejected() {
        let m = mesh4();
        let bottom = h_edge(&m, 0, 0);
        assert!(matches!(crack_components(&m, &[bottom]), Err(Error::BoundaryEdge(_))));
        assert!(CrackSet::new(&m, [bottom]).is_err());
    }

    #[test]
    fn lengths() {
        let m = mesh4();
        assert_eq!(crack_length(&m, &CrackSet::empty()), 0.0);
        let one = CrackSet::new(&m, [h_edge(&m, 1, 2)]).unwrap();
        assert!((crack_length(&m, &one) - 0.25).abs() < 1e-15);
        let three = CrackSet::new(&m, [h_edge(&m, 0, 2), h_edge(&m, 1, 2), h_edge(&m, 2, 2)]).unwrap();
        assert!((three.total_length() - 0.75).abs() < 1e-15);
        assert_eq!(three.n_components(), 1);
    }

    #[test]
    fn tips_exclude_boundary_vertices() {
        let m = mesh4();
        let slit = CrackSet::new(&m, [h_edge(&m, 0, 2), h_edge(&m, 1, 2)]).unwrap();
        // the slit starts on the left side; only the inner end is a tip
        assert_eq!(slit.tips(&m), vec![2 * 5 + 2]);
    }
}
