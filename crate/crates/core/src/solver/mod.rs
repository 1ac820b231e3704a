//! P1 finite elements on cracked meshes.
//!
//! Two elliptic problems are solved on the DOF space of a `(mesh, crack)`
//! pair, both with `u = g` on the Dirichlet DOFs:
//!
//! * the harmonic problem `(∇u|∇v) = 0`, whose minimum is the energy
//!   returned by [`harmonic_energy`];
//! * the penalized problem `(∇u|∇v) + λ(u − w|v) = 0`, whose minimum is
//!   [`penalized_energy`]. The `λ` term uses the lumped mass matrix, which
//!   keeps the discrete maximum principle on nonobtuse meshes.
//!
//! In the harmonic problem, DOF components that never reach a Dirichlet DOF
//! are set to zero.

mod field;
mod linalg;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_dofmap, CrackSet, DofMap, Mesh};
use crate::util::UnionFind;

pub use field::{l2_distance, l2_norm, transfer_field, Field, FieldJson};

use linalg::{conjugate_gradient, Csr, Skyline};

/// Nonnegative weight of the `‖u − w‖²` term.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PenaltyWeight(f64);

impl PenaltyWeight {
    pub const ZERO: PenaltyWeight = PenaltyWeight(0.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 0.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::Invalid(format!("penalty weight must be finite and nonnegative, got {lambda}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for PenaltyWeight {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PenaltyWeight> for f64 {
    fn from(w: PenaltyWeight) -> f64 {
        w.0
    }
}

/// Energy of a displacement/crack pair. The toughness is normalized to 1, so
/// `surface` is the crack length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk: f64,
    pub surface: f64,
    pub penalty: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(bulk: f64, surface: f64, penalty: f64) -> Self {
        Self { bulk, surface, penalty, total: bulk + surface + penalty }
    }
}

/// Linear solver settings.
#[derive(Clone, Copy, Debug)]
pub struct Solver {
    /// Systems with fewer unknowns than this are factorized directly.
    pub direct_limit: usize,
    pub cg_tol: f64,
    /// Defaults to ten times the number of unknowns.
    pub max_cg_iter: Option<usize>,
    /// Every returned field satisfies its assembled system to this relative
    /// residual.
    pub residual_tol: f64,
}

impl Default for Solver {
    fn default() -> Self {
        Self { direct_limit: 20_000, cg_tol: 1e-10, max_cg_iter: None, residual_tol: 1e-10 }
    }
}

impl Solver {
    pub fn harmonic(&self, mesh: &Mesh, crack: &CrackSet, g: &[f64]) -> Result<Field> {
        self.harmonic_on(mesh, Arc::new(build_dofmap(mesh, crack)), g)
    }

    pub fn harmonic_on(&self, mesh: &Mesh, space: Arc<DofMap>, g: &[f64]) -> Result<Field> {
        check_boundary(mesh, g)?;
        let values = self.solve(mesh, &space, g, PenaltyWeight::ZERO, None)?;
        Ok(Field::new(values, space))
    }

    /// Minimizer of `‖∇v‖² + λ‖v − w‖²` with `v = g` on the Dirichlet DOFs.
    /// `w` may live on any crack contained in `crack`.
    pub fn penalized(
        &self,
        mesh: &Mesh,
        crack: &CrackSet,
        g: &[f64],
        w: &Field,
        lambda: PenaltyWeight,
    ) -> Result<Field> {
        let space = Arc::new(build_dofmap(mesh, crack));
        let anchor = transfer_field(w, &space)?;
        self.penalized_on(mesh, space, g, anchor.values(), lambda)
    }

    /// As [`Solver::penalized`], with the anchor already on `space`.
    pub fn penalized_on(
        &self,
        mesh: &Mesh,
        space: Arc<DofMap>,
        g: &[f64],
        anchor: &[f64],
        lambda: PenaltyWeight,
    ) -> Result<Field> {
        check_boundary(mesh, g)?;
        if anchor.len() != space.n_dofs() {
            return Err(Error::SpaceMismatch);
        }
        let values = self.solve(mesh, &space, g, lambda, Some(anchor))?;
        Ok(Field::new(values, space))
    }

    /// Penalized minimizer and its energy, anchor given on `space`.
    pub fn penalized_minimizer(
        &self,
        mesh: &Mesh,
        space: Arc<DofMap>,
        g: &[f64],
        anchor: &[f64],
        lambda: PenaltyWeight,
    ) -> Result<(Field, EnergyBreakdown)> {
        let u = self.penalized_on(mesh, space, g, anchor, lambda)?;
        let bulk = bulk_energy(mesh, &u);
        let penalty = lambda.value() * field::mass_distance_sq(u.space(), u.values(), anchor);
        let e = EnergyBreakdown::new(bulk, u.space().crack().total_length(), penalty);
        Ok((u, e))
    }

    fn solve(
        &self,
        mesh: &Mesh,
        space: &DofMap,
        g: &[f64],
        lambda: PenaltyWeight,
        anchor: Option<&[f64]>,
    ) -> Result<Vec<f64>> {
        let n = space.n_dofs();
        let lam = lambda.value();
        let anchor = if lam > 0.0 { anchor } else { None };

        // fixed values: Dirichlet data, and zero on floating components of
        // the harmonic problem
        let mut fixed: Vec<Option<f64>> =
            (0..n).map(|d| space.is_dirichlet(d).then(|| g[space.vertex_of(d)])).collect();
        if anchor.is_none() {
            let mut uf = UnionFind::new(n);
            for t in 0..mesh.triangles().len() {
                let [a, b, c] = space.triangle_dofs(t);
                uf.union(a, b);
                uf.union(b, c);
            }
            let mut anchored = vec![false; n];
            for d in space.dirichlet_dofs() {
                let r = uf.find(d);
                anchored[r] = true;
            }
            if !anchored.iter().any(|&a| a) && g.iter().any(|&v| v != 0.0) {
                return Err(Error::NoDirichlet);
            }
            for d in 0..n {
                if !anchored[uf.find(d)] {
                    fixed[d] = Some(0.0);
                }
            }
        }

        let mut unknown = vec![usize::MAX; n];
        let mut n_free = 0;
        for d in 0..n {
            if fixed[d].is_none() {
                unknown[d] = n_free;
                n_free += 1;
            }
        }

        let mut rhs = vec![0.0; n_free];
        let mass = space.lumped_mass();
        if let Some(w) = anchor {
            for d in 0..n {
                if unknown[d] != usize::MAX {
                    rhs[unknown[d]] += lam * mass[d] * w[d];
                }
            }
        }
        let element = |t: usize| -> [[f64; 3]; 3] {
            let gr = mesh.basis_gradients(t);
            let area = mesh.area(t);
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    k[a][b] = area * (gr[a][0] * gr[b][0] + gr[a][1] * gr[b][1]);
                }
            }
            k
        };
        for t in 0..mesh.triangles().len() {
            let dofs = space.triangle_dofs(t);
            let k = element(t);
            for a in 0..3 {
                let ia = unknown[dofs[a]];
                if ia == usize::MAX {
                    continue;
                }
                for b in 0..3 {
                    if let Some(v) = fixed[dofs[b]] {
                        rhs[ia] -= k[a][b] * v;
                    }
                }
            }
        }

        let x = if n_free == 0 {
            Vec::new()
        } else if n_free < self.direct_limit {
            let mut first: Vec<usize> = (0..n_free).collect();
            for t in 0..mesh.triangles().len() {
                let idx = space.triangle_dofs(t).map(|d| unknown[d]);
                let lo = idx.iter().copied().filter(|&i| i != usize::MAX).min();
                if let Some(lo) = lo {
                    for &i in idx.iter().filter(|&&i| i != usize::MAX) {
                        first[i] = first[i].min(lo);
                    }
                }
            }
            let mut sky = Skyline::with_profile(first);
            for t in 0..mesh.triangles().len() {
                let idx = space.triangle_dofs(t).map(|d| unknown[d]);
                let k = element(t);
                for a in 0..3 {
                    for b in 0..3 {
                        let (i, j) = (idx[a], idx[b]);
                        if i != usize::MAX && j != usize::MAX && j <= i {
                            sky.add(i, j, k[a][b]);
                        }
                    }
                }
            }
            for d in 0..n {
                if unknown[d] != usize::MAX {
                    sky.add(unknown[d], unknown[d], lam * mass[d]);
                }
            }
            sky.factor()?;
            let mut x = rhs.clone();
            sky.solve(&mut x);
            x
        } else {
            let mut trip = Vec::with_capacity(9 * mesh.triangles().len() + n_free);
            for t in 0..mesh.triangles().len() {
                let idx = space.triangle_dofs(t).map(|d| unknown[d]);
                let k = element(t);
                for a in 0..3 {
                    for b in 0..3 {
                        if idx[a] != usize::MAX && idx[b] != usize::MAX {
                            trip.push((idx[a], idx[b], k[a][b]));
                        }
                    }
                }
            }
            for d in 0..n {
                if unknown[d] != usize::MAX {
                    trip.push((unknown[d], unknown[d], lam * mass[d]));
                }
            }
            let csr = Csr::from_triplets(n_free, trip);
            conjugate_gradient(&csr, &rhs, self.cg_tol, self.max_cg_iter.unwrap_or(10 * n_free))?
        };

        // element-by-element residual of the free rows
        let mut ax = vec![0.0; n_free];
        for t in 0..mesh.triangles().len() {
            let idx = space.triangle_dofs(t).map(|d| unknown[d]);
            let k = element(t);
            for a in 0..3 {
                if idx[a] == usize::MAX {
                    continue;
                }
                for b in 0..3 {
                    if idx[b] != usize::MAX {
                        ax[idx[a]] += k[a][b] * x[idx[b]];
                    }
                }
            }
        }
        for d in 0..n {
            if unknown[d] != usize::MAX {
                ax[unknown[d]] += lam * mass[d] * x[unknown[d]];
            }
        }
        let res = linalg::norm(&rhs.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>());
        let scale = linalg::norm(&rhs).max(linalg::norm(&ax));
        let rel = if scale > 0.0 { res / scale } else { res };
        if rel.is_nan() || rel > self.residual_tol {
            return Err(Error::NotConverged { residual: rel, iterations: 0 });
        }

        Ok((0..n).map(|d| fixed[d].unwrap_or_else(|| x[unknown[d]])).collect())
    }
}

fn check_boundary(mesh: &Mesh, g: &[f64]) -> Result<()> {
    if g.len() != mesh.n_vertices() {
        return Err(Error::BoundaryFieldLength { expected: mesh.n_vertices(), found: g.len() });
    }
    Ok(())
}

/// `∫|∇u|²` of a field on its own DOF space.
pub fn bulk_energy(mesh: &Mesh, u: &Field) -> f64 {
    let space = u.space();
    let v = u.values();
    (0..mesh.triangles().len())
        .map(|t| {
            let g = mesh.gradient(t, space.triangle_dofs(t).map(|d| v[d]));
            mesh.area(t) * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// `(∇u|∇φ)` for a field `u` on a cracked space and a nodal field `φ` of the
/// uncracked mesh.
pub fn gradient_product(mesh: &Mesh, u: &Field, phi: &[f64]) -> f64 {
    let space = u.space();
    let v = u.values();
    mesh.triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let gu = mesh.gradient(t, space.triangle_dofs(t).map(|d| v[d]));
            let gp = mesh.gradient(t, tri.map(|w| phi[w]));
            mesh.area(t) * (gu[0] * gp[0] + gu[1] * gp[1])
        })
        .sum()
}

pub fn solve_harmonic(mesh: &Mesh, crack: &CrackSet, g: &[f64]) -> Result<Field> {
    Solver::default().harmonic(mesh, crack, g)
}

pub fn solve_penalized(mesh: &Mesh, crack: &CrackSet, g: &[f64], w: &Field, lambda: PenaltyWeight) -> Result<Field> {
    Solver::default().penalized(mesh, crack, g, w, lambda)
}

/// Energy of `u` on `crack` without a penalty term.
pub fn energy(mesh: &Mesh, crack: &CrackSet, u: &Field) -> Result<EnergyBreakdown> {
    if u.space().mesh_id() != mesh.fingerprint() || u.crack() != crack {
        return Err(Error::SpaceMismatch);
    }
    Ok(EnergyBreakdown::new(bulk_energy(mesh, u), crack.total_length(), 0.0))
}

/// Minimum of `‖∇v‖² + ℋ¹(K)` over fields equal to `g` on the Dirichlet DOFs.
pub fn harmonic_energy(mesh: &Mesh, crack: &CrackSet, g: &[f64]) -> Result<EnergyBreakdown> {
    let u = solve_harmonic(mesh, crack, g)?;
    energy(mesh, crack, &u)
}

/// Minimum of `‖∇v‖² + ℋ¹(K) + λ‖v − w‖²` over fields equal to `g` on the
/// Dirichlet DOFs.
pub fn penalized_energy(
    mesh: &Mesh,
    crack: &CrackSet,
    g: &[f64],
    w: &Field,
    lambda: PenaltyWeight,
) -> Result<EnergyBreakdown> {
    let space = Arc::new(build_dofmap(mesh, crack));
    let anchor = transfer_field(w, &space)?;
    let (_, e) = Solver::default().penalized_minimizer(mesh, space, g, anchor.values(), lambda)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_mesh, Side};

    #[test]
    fn affine_data_is_reproduced() {
        let m = build_rect_mesh(1.0, 1.0, 5, 4, &Side::ALL).unwrap();
        let g = m.nodal(|p| 0.3 * p[0] - 1.2 * p[1] + 0.5);
        let u = solve_harmonic(&m, &CrackSet::empty(), &g).unwrap();
        for (a, b) in u.values().iter().zip(&g) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn penalty_weight_validation() {
        assert!(PenaltyWeight::new(-1.0).is_err());
        assert!(PenaltyWeight::new(f64::NAN).is_err());
        assert_eq!(PenaltyWeight::new(2.0).unwrap().value(), 2.0);
    }

    #[test]
    fn constant_gradient_energy() {
        let m = build_rect_mesh(1.0, 1.0, 4, 4, &Side::ALL).unwrap();
        let g = m.nodal(|p| 3.0 * p[0]);
        let e = harmonic_energy(&m, &CrackSet::empty(), &g).unwrap();
        assert!((e.bulk - 9.0).abs() < 1e-12);
        assert_eq!(e.surface, 0.0);
        assert_eq!(e.total, e.bulk);
    }

    #[test]
    fn cg_path_matches_direct() {
        let m = build_rect_mesh(1.0, 1.0, 12, 12, &[Side::Left, Side::Bottom]).unwrap();
        let g = m.nodal(|p| (3.0 * p[0]).sin() + p[1] * p[1]);
        let w = Field::from_nodal(&m, &m.nodal(|p| p[0] * p[1]));
        let lam = PenaltyWeight::new(2.0).unwrap();
        let direct = Solver::default().penalized(&m, &CrackSet::empty(), &g, &w, lam).unwrap();
        let cg =
            Solver { direct_limit: 0, ..Solver::default() }.penalized(&m, &CrackSet::empty(), &g, &w, lam).unwrap();
        for (a, b) in direct.values().iter().zip(cg.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn wrong_boundary_length() {
        let m = build_rect_mesh(1.0, 1.0, 2, 2, &Side::ALL).unwrap();
        assert!(matches!(solve_harmonic(&m, &CrackSet::empty(), &[0.0; 3]), Err(Error::BoundaryFieldLength { .. })));
    }
}
