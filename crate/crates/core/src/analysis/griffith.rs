use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{BoundaryProgram, EvolutionTrace};
use crate::mesh::{CrackSet, EdgeId, Mesh};
use crate::solver::{bulk_energy, Solver};

/// Default tolerance on `|1 − G|` at advancing steps and on `G − 1` at
/// stationary ones.
pub const TOL_G: f64 = 0.2;

/// Energy release rate of extending `crack` by the edge `e`:
/// `[bulk(K) − bulk(K ∪ {e})] / |e|` for the harmonic minimizers with data `g`.
pub fn release_rate(mesh: &Mesh, crack: &CrackSet, g: &[f64], e: EdgeId) -> Result<f64> {
    let edge = mesh.edge(e)?;
    if edge.is_boundary() {
        return Err(Error::BoundaryEdge(e));
    }
    let touches = edge.vertices.iter().any(|&v| mesh.vertex_edges(v).iter().any(|&f| crack.contains(f)));
    if crack.contains(e) || !touches {
        return Err(Error::NotIncident(e));
    }
    let solver = Solver::default();
    let before = bulk_energy(mesh, &solver.harmonic(mesh, crack, g)?);
    rate_from(mesh, &solver, crack, g, e, before)
}

fn rate_from(mesh: &Mesh, solver: &Solver, crack: &CrackSet, g: &[f64], e: EdgeId, before: f64) -> Result<f64> {
    let extended = crack.with_edges(mesh, &[e])?;
    let after = bulk_energy(mesh, &solver.harmonic(mesh, &extended, g)?);
    Ok((before - after) / mesh.edge_length(e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GriffithRow {
    pub step: usize,
    pub t: f64,
    pub tip: usize,
    /// Crack length added from this tip during the step.
    pub advance: f64,
    pub release_rate: f64,
    /// `1 − G`.
    pub slack: f64,
    /// `(1 − G)·dσ/δ`.
    pub complementarity: f64,
    pub advancing: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GriffithReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub tol_g: f64,
    pub rows: Vec<GriffithRow>,
}

impl GriffithReport {
    fn not_applicable(reason: String, tol_g: f64) -> Self {
        Self { applicable: false, reason: Some(reason), tol_g, rows: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Largest violation measure: `|1 − G|` on advancing rows, `(G − 1)⁺`
    /// on stationary ones.
    pub fn worst_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| if r.advancing { (1.0 - r.release_rate).abs() } else { (r.release_rate - 1.0).max(0.0) })
            .fold(0.0, f64::max)
    }

    pub fn advancing_steps(&self) -> usize {
        self.rows.iter().filter(|r| r.advancing).count()
    }
}

/// Growth of one step split into paths from the live tips. Returns `None`
/// when the added edges are not a union of such paths.
fn split_into_paths(mesh: &Mesh, prev: &CrackSet, added: &[EdgeId], tips: &[usize]) -> Option<Vec<Vec<EdgeId>>> {
    let mut left: BTreeSet<EdgeId> = added.iter().copied().collect();
    let mut paths = Vec::with_capacity(tips.len());
    for &tip in tips {
        let mut path = Vec::new();
        let mut v = tip;
        loop {
            let next: Vec<EdgeId> = mesh.vertex_edges(v).iter().copied().filter(|e| left.contains(e)).collect();
            match next.len() {
                0 => break,
                1 => {
                    let e = next[0];
                    left.remove(&e);
                    path.push(e);
                    v = mesh.edges()[e].other(v);
                    // a path ends where it meets the old crack or the boundary
                    let meets_old = mesh.vertex_edges(v).iter().any(|&f| prev.contains(f));
                    if meets_old || mesh.is_boundary_vertex(v) {
                        break;
                    }
                }
                _ => return None,
            }
        }
        paths.push(path);
    }
    left.is_empty().then_some(paths)
}

/// Discrete Griffith conditions along the trace: `dσ ≥ 0`, `G ≤ 1 + tol` at
/// stationary tips and `|1 − G| ≤ tol` at advancing ones.
///
/// Applies to traces whose growth consists of paths from the tips of the
/// initial crack; anything else (nucleation, branching) is reported as not
/// applicable. At an advancing step G is the rate of the first edge of the
/// path on the previous crack; at a stationary step it is the largest rate
/// over the edges leaving the tip.
pub fn griffith_check(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    program: &BoundaryProgram,
    tol_g: f64,
) -> Result<GriffithReport> {
    let k0 = &trace.initial_crack;
    if k0.is_empty() {
        if trace.records.iter().any(|r| !r.crack.is_empty()) {
            return Ok(GriffithReport::not_applicable("cracks nucleate from an uncracked body".into(), tol_g));
        }
        return Ok(GriffithReport { applicable: true, reason: None, tol_g, rows: Vec::new() });
    }

    // first pass: structure
    let mut tips: Vec<usize> = k0.tips(mesh);
    let mut live: Vec<bool> = vec![true; tips.len()];
    let mut plan = Vec::new();
    for w in trace.records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let added = cur.crack.difference(&prev.crack);
        let live_tips: Vec<usize> = tips.iter().zip(&live).filter(|(_, &l)| l).map(|(&t, _)| t).collect();
        let Some(paths) = split_into_paths(mesh, &prev.crack, &added, &live_tips) else {
            return Ok(GriffithReport::not_applicable(
                format!("growth at step {} is not a set of paths from the crack tips", cur.index),
                tol_g,
            ));
        };
        let mut step_paths = Vec::new();
        let mut k = 0;
        for (slot, l) in live.iter_mut().enumerate() {
            if !*l {
                continue;
            }
            let path = paths[k].clone();
            k += 1;
            let tip = tips[slot];
            if !path.is_empty() {
                let end = path.iter().fold(tip, |v, &e| mesh.edges()[e].other(v));
                tips[slot] = end;
                // a tip that ran into the boundary or the old crack is spent
                if mesh.is_boundary_vertex(end) || prev.crack.vertex_degrees(mesh).contains_key(&end) {
                    *l = false;
                }
            }
            step_paths.push((tip, path));
        }
        plan.push(step_paths);
    }

    // second pass: release rates
    let solver = Solver::default();
    let mut rows = Vec::new();
    let delta = trace.schedule.delta();
    for (w, step_paths) in trace.records.windows(2).zip(plan) {
        let (prev, cur) = (&w[0], &w[1]);
        let g = program.at(cur.time);
        let mut base_prev: Option<f64> = None;
        let mut base_cur: Option<f64> = None;
        for (tip, path) in step_paths {
            let advance = path.iter().map(|&e| mesh.edge_length(e)).fold(0.0, |a, l| a + l);
            let rate = if let Some(&first) = path.first() {
                let before = match base_prev {
                    Some(b) => b,
                    None => *base_prev.insert(bulk_energy(mesh, &solver.harmonic(mesh, &prev.crack, &g)?)),
                };
                rate_from(mesh, &solver, &prev.crack, &g, first, before)?
            } else {
                let before = match base_cur {
                    Some(b) => b,
                    None => *base_cur.insert(bulk_energy(mesh, &solver.harmonic(mesh, &cur.crack, &g)?)),
                };
                let mut best = f64::NEG_INFINITY;
                for &e in mesh.vertex_edges(tip) {
                    if mesh.edges()[e].is_boundary() || cur.crack.contains(e) {
                        continue;
                    }
                    best = best.max(rate_from(mesh, &solver, &cur.crack, &g, e, before)?);
                }
                if best == f64::NEG_INFINITY {
                    continue;
                }
                best
            };
            let advancing = advance > 0.0;
            let pass = advance >= 0.0 && if advancing { (1.0 - rate).abs() <= tol_g } else { rate <= 1.0 + tol_g };
            rows.push(GriffithRow {
                step: cur.index,
                t: cur.time,
                tip,
                advance,
                release_rate: rate,
                slack: 1.0 - rate,
                complementarity: (1.0 - rate) * advance / delta,
                advancing,
                pass,
            });
        }
    }
    Ok(GriffithReport { applicable: true, reason: None, tol_g, rows })
}
