use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::mesh::{admissible_extensions, build_dofmap, crack_components, CrackSet, EdgeId, ExtensionPolicy, Mesh};
use crate::solver::{transfer_field, Field, Solver};

/// Relative tolerance of the minimality comparison.
pub const MINIMALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub step: usize,
    pub added: Vec<EdgeId>,
    pub probe_energy: f64,
    pub reference: f64,
    /// `probe_energy − reference`.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalityReport {
    pub step: usize,
    pub reference: f64,
    pub rows: Vec<ProbeRow>,
}

impl MinimalityReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

/// Boundary data reconstructed from a field: its values at Dirichlet DOFs.
/// Other vertices get 0, which the solver never reads.
fn dirichlet_data(mesh: &Mesh, u: &Field) -> Vec<f64> {
    let mut g = vec![0.0; mesh.n_vertices()];
    for d in u.space().dirichlet_dofs() {
        g[u.space().vertex_of(d)] = u.values()[d];
    }
    g
}

/// Checks `ℰ_λ(g_i, K_i, u_i) ≤ ℰ_λ(g_i, K, u_i)` on `n_probes` random
/// supersets `K ⊇ K_i` and on every single-edge extension (tip or
/// nucleation) within the component budget.
pub fn minimality_check(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    i: usize,
    n_probes: usize,
    seed: u64,
) -> Result<MinimalityReport> {
    let record = trace.records.get(i).ok_or_else(|| Error::Invalid(format!("trace has no record {i}")))?;
    let mut probes = admissible_extensions(mesh, &record.crack, trace.m, ExtensionPolicy::TipNucleate { budget: 1 })?;
    probes.extend(random_supersets(mesh, &record.crack, trace.m, n_probes, seed)?);
    minimality_check_with(mesh, trace, i, &probes)
}

/// As [`minimality_check`] with an explicit probe list.
pub fn minimality_check_with(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    i: usize,
    probes: &[CrackSet],
) -> Result<MinimalityReport> {
    if i == 0 {
        return Err(Error::Invalid("minimality is checked from step 1 on".into()));
    }
    let record = trace.records.get(i).ok_or_else(|| Error::Invalid(format!("trace has no record {i}")))?;
    let g = dirichlet_data(mesh, &record.field);
    let solver = Solver::default();
    let lambda = trace.lambda;
    let anchor = &record.field;

    let (_, base) = solver.penalized_minimizer(mesh, Arc::clone(anchor.space()), &g, anchor.values(), lambda)?;
    let base_dofs = anchor.space().n_dofs();
    let reference = base.total;
    let tol = MINIMALITY_TOL * reference.abs().max(1.0);

    let energies: Vec<f64> = probes
        .par_iter()
        .map(|k| {
            if !k.is_superset_of(&record.crack) {
                return Err(Error::NotARefinement);
            }
            let space = Arc::new(build_dofmap(mesh, k));
            if space.n_dofs() == base_dofs {
                return Ok(base.bulk + base.penalty + k.total_length());
            }
            let w = transfer_field(anchor, &space)?;
            let (_, e) = solver.penalized_minimizer(mesh, space, &g, w.values(), lambda)?;
            Ok(e.total)
        })
        .collect::<Result<_>>()?;

    let rows = probes
        .iter()
        .zip(energies)
        .map(|(k, e)| ProbeRow {
            step: i,
            added: k.difference(&record.crack),
            probe_energy: e,
            reference,
            slack: e - reference,
            pass: reference <= e + tol,
        })
        .collect();
    Ok(MinimalityReport { step: i, reference, rows })
}

/// Random supersets of `crack` adding one to three interior edges, within the
/// component budget. Gives up on a draw after a bounded number of rejections.
pub fn random_supersets(mesh: &Mesh, crack: &CrackSet, m: usize, n: usize, seed: u64) -> Result<Vec<CrackSet>> {
    let free: Vec<EdgeId> = mesh.interior_edges().filter(|&e| !crack.contains(e)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    if free.is_empty() {
        return Ok(out);
    }
    for _ in 0..n {
        for _attempt in 0..64 {
            let k = rng.random_range(1..=3.min(free.len()));
            let added: BTreeSet<EdgeId> = free.choose_multiple(&mut rng, k).copied().collect();
            let mut edges = crack.edges().to_vec();
            edges.extend(&added);
            if crack_components(mesh, &edges)? <= m {
                out.push(CrackSet::new(mesh, edges)?);
                break;
            }
        }
    }
    Ok(out)
}
