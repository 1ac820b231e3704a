use super::{BoundaryTag, CrackSet, Mesh};
use crate::util::UnionFind;

/// Degrees of freedom of P1 fields on a cracked mesh.
///
/// Around every vertex, triangle corners that can be reached from one another
/// by rotating about the vertex without crossing a crack edge share a DOF.
/// DOFs are numbered vertex by vertex, so the numbering keeps the bandwidth of
/// the uncracked mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    corner_dofs: Vec<[usize; 3]>,
    dof_vertex: Vec<usize>,
    dirichlet: Vec<bool>,
    mass: Vec<f64>,
    mesh_id: u64,
    crack: CrackSet,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.dof_vertex.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.corner_dofs.len()
    }

    /// Global DOF of corner `k` of triangle `t`.
    pub fn dof(&self, t: usize, k: usize) -> usize {
        self.corner_dofs[t][k]
    }

    pub fn triangle_dofs(&self, t: usize) -> [usize; 3] {
        self.corner_dofs[t]
    }

    pub fn vertex_of(&self, dof: usize) -> usize {
        self.dof_vertex[dof]
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn dirichlet_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&d| self.dirichlet[d])
    }

    /// Lumped mass of each DOF: a third of the area of every incident corner.
    pub fn lumped_mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn crack(&self) -> &CrackSet {
        &self.crack
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    /// Number of DOFs at each vertex minus one, summed: how many copies the
    /// crack created.
    pub fn duplicated(&self) -> usize {
        self.n_dofs() - self.dof_vertex.last().map_or(0, |&v| v + 1)
    }
}

pub fn build_dofmap(mesh: &Mesh, crack: &CrackSet) -> DofMap {
    let nt = mesh.triangles().len();
    let mut corner_dofs = vec![[usize::MAX; 3]; nt];
    let mut dof_vertex = Vec::with_capacity(mesh.n_vertices());

    for v in 0..mesh.n_vertices() {
        let fan = mesh.vertex_triangles(v);
        let mut uf = UnionFind::new(fan.len());
        for &e in mesh.vertex_edges(v) {
            let edge = &mesh.edges()[e];
            if edge.is_boundary() || crack.contains(e) {
                continue;
            }
            let a = fan.iter().position(|&t| t == edge.triangles[0]).expect("edge triangle in fan");
            let b = fan.iter().position(|&t| t == edge.triangles[1]).expect("edge triangle in fan");
            uf.union(a, b);
        }
        // fan is sorted by triangle index, so components get ids in order of
        // their smallest triangle
        let mut root_dof: Vec<(usize, usize)> = Vec::new();
        for (i, &t) in fan.iter().enumerate() {
            let root = uf.find(i);
            let dof = match root_dof.iter().find(|(r, _)| *r == root) {
                Some(&(_, d)) => d,
                None => {
                    let d = dof_vertex.len();
                    dof_vertex.push(v);
                    root_dof.push((root, d));
                    d
                }
            };
            let k = mesh.triangles()[t].iter().position(|&w| w == v).expect("vertex in triangle");
            corner_dofs[t][k] = dof;
        }
    }

    let n = dof_vertex.len();
    let mut dirichlet = vec![false; n];
    for (&e, &tag) in mesh.boundary_tags() {
        if tag != BoundaryTag::Dirichlet {
            continue;
        }
        let edge = &mesh.edges()[e];
        let t = edge.triangles[0];
        for v in edge.vertices {
            let k = mesh.triangles()[t].iter().position(|&w| w == v).expect("vertex in triangle");
            dirichlet[corner_dofs[t][k]] = true;
        }
    }

    let mut mass = vec![0.0; n];
    for (t, dofs) in corner_dofs.iter().enumerate() {
        for &d in dofs {
            mass[d] += mesh.area(t) / 3.0;
        }
    }

    DofMap { corner_dofs, dof_vertex, dirichlet, mass, mesh_id: mesh.fingerprint(), crack: crack.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Side};

    #[test]
    fn uncracked_has_one_dof_per_vertex() {
        let m = build_rect_mesh(1.0, 1.0, 4, 4, &Side::ALL).unwrap();
        let d = build_dofmap(&m, &CrackSet::empty());
        assert_eq!(d.n_dofs(), m.n_vertices());
        assert_eq!(d.duplicated(), 0);
        for (t, tri) in m.triangles().iter().enumerate() {
            assert_eq!(d.triangle_dofs(t), *tri);
        }
        assert_eq!(d.dirichlet_dofs().count(), 16);
    }

    #[test]
    fn single_interior_edge_splits_nothing() {
        let m = build_rect_mesh(1.0, 1.0, 4, 4, &Side::ALL).unwrap();
        let crack = CrackSet::new(&m, [m.find_edge(6, 7).unwrap()]).unwrap();
        assert_eq!(build_dofmap(&m, &crack).n_dofs(), m.n_vertices());
    }

    #[test]
    fn slit_from_boundary_duplicates_inner_vertices_but_not_tip() {
        let m = build_rect_mesh(1.0, 1.0, 4, 4, &Side::ALL).unwrap();
        // horizontal slit along y = 0.5 from x = 0 to x = 0.75
        let crack = CrackSet::new(
            &m,
            [m.find_edge(10, 11).unwrap(), m.find_edge(11, 12).unwrap(), m.find_edge(12, 13).unwrap()],
        )
        .unwrap();
        let d = build_dofmap(&m, &crack);
        // boundary vertex 10 and interior vertices 11, 12 are split; tip 13 is not
        assert_eq!(d.duplicated(), 3);
        let copies = |v: usize| (0..d.n_dofs()).filter(|&k| d.vertex_of(k) == v).count();
        assert_eq!(copies(10), 2);
        assert_eq!(copies(11), 2);
        assert_eq!(copies(12), 2);
        assert_eq!(copies(13), 1);
        // both copies of the boundary vertex touch a Dirichlet edge
        let dir10 = (0..d.n_dofs()).filter(|&k| d.vertex_of(k) == 10 && d.is_dirichlet(k)).count();
        assert_eq!(dir10, 2);
        let total: f64 = d.lumped_mass().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
