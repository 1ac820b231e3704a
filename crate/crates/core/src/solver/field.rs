use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::{build_dofmap, CrackSet, DofMap, Mesh};

/// Nodal values on the DOF space of a `(mesh, crack)` pair.
#[derive(Clone, Debug)]
pub struct Field {
    values: Vec<f64>,
    space: Arc<DofMap>,
}

impl Field {
    pub fn new(values: Vec<f64>, space: Arc<DofMap>) -> Self {
        assert_eq!(values.len(), space.n_dofs(), "field length must match its DOF space");
        Self { values, space }
    }

    pub fn zeros(space: Arc<DofMap>) -> Self {
        Self { values: vec![0.0; space.n_dofs()], space }
    }

    /// A nodal field of the uncracked mesh as a field on the empty crack.
    pub fn from_nodal(mesh: &Mesh, nodal: &[f64]) -> Self {
        let space = Arc::new(build_dofmap(mesh, &CrackSet::empty()));
        Self::new(nodal.to_vec(), space)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn space(&self) -> &Arc<DofMap> {
        &self.space
    }

    pub fn crack(&self) -> &CrackSet {
        self.space.crack()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Stable identifier of the DOF space: mesh fingerprint plus crack edges.
    pub fn space_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.space.mesh_id().to_le_bytes());
        for &e in self.crack().edges() {
            h.update((e as u64).to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson { values: self.values.clone(), dofmap_hash: self.space_hash() }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.space.mesh_id() == other.space.mesh_id() && self.crack() == other.crack()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub values: Vec<f64>,
    pub dofmap_hash: String,
}

/// Moves `u` onto a space whose crack contains the crack of `u`. Every new
/// DOF takes the value of the old DOF its corners belonged to.
pub fn transfer_field(u: &Field, to: &Arc<DofMap>) -> Result<Field> {
    let from = u.space();
    if from.mesh_id() != to.mesh_id() {
        return Err(Error::SpaceMismatch);
    }
    if Arc::ptr_eq(from, to) || from.crack() == to.crack() {
        return Ok(Field::new(u.values.clone(), Arc::clone(to)));
    }
    if !to.crack().is_superset_of(from.crack()) {
        return Err(Error::NotARefinement);
    }
    let mut values = vec![0.0; to.n_dofs()];
    for t in 0..to.n_triangles() {
        let src = from.triangle_dofs(t);
        let dst = to.triangle_dofs(t);
        for k in 0..3 {
            values[dst[k]] = u.values[src[k]];
        }
    }
    Ok(Field::new(values, Arc::clone(to)))
}

/// Lumped-mass L² norm.
pub fn l2_norm(u: &Field) -> f64 {
    let mass = u.space().lumped_mass();
    u.values.iter().zip(mass).map(|(v, m)| m * v * v).sum::<f64>().sqrt()
}

/// Lumped-mass L² distance between fields on any two cracks of the same mesh,
/// summed corner by corner (the crack has zero area).
pub fn l2_distance(mesh: &Mesh, a: &Field, b: &Field) -> Result<f64> {
    if a.space().mesh_id() != mesh.fingerprint() || b.space().mesh_id() != mesh.fingerprint() {
        return Err(Error::SpaceMismatch);
    }
    let mut acc = 0.0;
    for t in 0..mesh.triangles().len() {
        let (da, db) = (a.space().triangle_dofs(t), b.space().triangle_dofs(t));
        let w = mesh.area(t) / 3.0;
        for k in 0..3 {
            let d = a.values[da[k]] - b.values[db[k]];
            acc += w * d * d;
        }
    }
    Ok(acc.sqrt())
}

pub(crate) fn mass_distance_sq(space: &DofMap, a: &[f64], b: &[f64]) -> f64 {
    space.lumped_mass().iter().zip(a.iter().zip(b)).map(|(m, (x, y))| m * (x - y) * (x - y)).sum()
}
