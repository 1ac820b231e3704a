use std::collections::BTreeSet;
use std::fmt;

use super::{CrackSet, EdgeId, Mesh};
use crate::error::{Error, Result};

/// Family of crack supersets searched by one evolution step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionPolicy {
    /// Simple edge paths of length `1..=budget` grown from each crack tip.
    Tip { budget: usize },
    /// `Tip` plus every single interior edge not yet in the crack.
    TipNucleate { budget: usize },
    /// Every superset adding at most `k` interior edges. Small meshes only.
    Exhaustive { k: usize },
}

impl Default for ExtensionPolicy {
    fn default() -> Self {
        ExtensionPolicy::TipNucleate { budget: 3 }
    }
}

impl ExtensionPolicy {
    /// Parses `TIP`, `TIP+NUCLEATE` or `EXHAUSTIVE` (case-insensitive).
    pub fn parse(kind: &str, budget: usize) -> Result<Self> {
        match kind.trim().to_ascii_uppercase().as_str() {
            "TIP" => Ok(Self::Tip { budget }),
            "TIP+NUCLEATE" | "TIP_NUCLEATE" => Ok(Self::TipNucleate { budget }),
            "EXHAUSTIVE" => Ok(Self::Exhaustive { k: budget }),
            _ => Err(Error::UnknownPolicy(kind.to_string())),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Tip { .. } => "TIP",
            Self::TipNucleate { .. } => "TIP+NUCLEATE",
            Self::Exhaustive { .. } => "EXHAUSTIVE",
        }
    }

    pub fn budget(&self) -> usize {
        match *self {
            Self::Tip { budget } | Self::TipNucleate { budget } => budget,
            Self::Exhaustive { k } => k,
        }
    }

    /// Whether an evolution step repeats the search from an accepted crack.
    /// Exhaustive search is a single round so that the accepted crack is the
    /// minimizer over the whole family.
    pub fn iterated(&self) -> bool {
        !matches!(self, Self::Exhaustive { .. })
    }
}

impl fmt::Display for ExtensionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind(), self.budget())
    }
}

/// Strict supersets of `crack` with at most `m` components, drawn from the
/// family selected by `policy`.
///
/// Candidates are sorted by number of added edges, then lexicographically by
/// edge ids, and contain no duplicates.
pub fn admissible_extensions(
    mesh: &Mesh,
    crack: &CrackSet,
    m: usize,
    policy: ExtensionPolicy,
) -> Result<Vec<CrackSet>> {
    if crack.n_components() > m {
        return Err(Error::ComponentBudget { found: crack.n_components(), budget: m });
    }
    let mut added: BTreeSet<Vec<EdgeId>> = BTreeSet::new();
    match policy {
        ExtensionPolicy::Tip { budget } => tip_paths(mesh, crack, budget, &mut added),
        ExtensionPolicy::TipNucleate { budget } => {
            tip_paths(mesh, crack, budget, &mut added);
            for e in mesh.interior_edges().filter(|&e| !crack.contains(e)) {
                added.insert(vec![e]);
            }
        }
        ExtensionPolicy::Exhaustive { k } => {
            let free: Vec<EdgeId> = mesh.interior_edges().filter(|&e| !crack.contains(e)).collect();
            let mut chosen = Vec::with_capacity(k);
            combinations(&free, 0, k, &mut chosen, &mut added);
        }
    }

    let mut out = Vec::with_capacity(added.len());
    for extra in ordered(added) {
        let candidate = crack.with_edges(mesh, &extra)?;
        if candidate.n_components() <= m {
            out.push(candidate);
        }
    }
    Ok(out)
}

fn ordered(sets: BTreeSet<Vec<EdgeId>>) -> Vec<Vec<EdgeId>> {
    let mut v: Vec<Vec<EdgeId>> = sets.into_iter().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v
}

fn tip_paths(mesh: &Mesh, crack: &CrackSet, budget: usize, out: &mut BTreeSet<Vec<EdgeId>>) {
    if budget == 0 {
        return;
    }
    let crack_vertices: BTreeSet<usize> = crack.vertex_degrees(mesh).into_keys().collect();
    for tip in crack.tips(mesh) {
        let mut path = Vec::with_capacity(budget);
        let mut visited = vec![tip];
        grow(mesh, crack, &crack_vertices, tip, budget, &mut path, &mut visited, out);
    }
}

#[allow(clippy::too_many_arguments)]
fn grow(
    mesh: &Mesh,
    crack: &CrackSet,
    crack_vertices: &BTreeSet<usize>,
    at: usize,
    budget: usize,
    path: &mut Vec<EdgeId>,
    visited: &mut Vec<usize>,
    out: &mut BTreeSet<Vec<EdgeId>>,
) {
    for &e in mesh.vertex_edges(at) {
        let edge = &mesh.edges()[e];
        if edge.is_boundary() || crack.contains(e) {
            continue;
        }
        let next = edge.other(at);
        if visited.contains(&next) {
            continue;
        }
        path.push(e);
        let mut key = path.clone();
        key.sort_unstable();
        out.insert(key);
        // a path that reaches the existing crack or the boundary stops there
        if path.len() < budget && !crack_vertices.contains(&next) && !mesh.is_boundary_vertex(next) {
            visited.push(next);
            grow(mesh, crack, crack_vertices, next, budget, path, visited, out);
            visited.pop();
        }
        path.pop();
    }
}

fn combinations(free: &[EdgeId], start: usize, k: usize, chosen: &mut Vec<EdgeId>, out: &mut BTreeSet<Vec<EdgeId>>) {
    if chosen.len() == k {
        return;
    }
    for i in start..free.len() {
        chosen.push(free[i]);
        out.insert(chosen.clone());
        combinations(free, i + 1, k, chosen, out);
        chosen.pop();
    }
}
