//! Discrete-time penalized evolution.
//!
//! At every time `t_i = i·δ` the crack `K_i ⊇ K_{i−1}` and the displacement
//! `u_i` minimize `‖∇u‖² + ℋ¹(K) + λ‖u − u_{i−1}‖²` with `u = g(t_i)` on the
//! Dirichlet boundary. The minimization over cracks is restricted to the
//! family produced by an [`ExtensionPolicy`]: tip policies run an iterated
//! greedy descent, exhaustive policies a single round over every small
//! superset.

mod program;
mod trace;

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{admissible_extensions, build_dofmap, CrackSet, ExtensionPolicy, Mesh};
use crate::solver::{gradient_product, l2_distance, transfer_field, EnergyBreakdown, Field, PenaltyWeight, Solver};

pub use program::{BoundaryProgram, Mode, Schedule, TimeProfile};
pub use trace::{AprioriBound, CrackSnapshot, EvolutionTrace, StepRecord, TRACE_COLUMNS};

/// Smallest relative improvement of the total energy that makes a candidate
/// crack acceptable.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Fixed parameters of an evolution.
#[derive(Clone, Copy, Debug)]
pub struct Evolution {
    pub lambda: PenaltyWeight,
    /// Bound on the number of crack components.
    pub m: usize,
    pub policy: ExtensionPolicy,
    pub rel_tol: f64,
    pub solver: Solver,
}

impl Evolution {
    pub fn new(lambda: PenaltyWeight, m: usize, policy: ExtensionPolicy) -> Self {
        Self { lambda, m, policy, rel_tol: DEFAULT_REL_TOL, solver: Solver::default() }
    }

    /// One incremental step from `prev` with boundary data `g`.
    pub fn step(&self, mesh: &Mesh, prev: &StepRecord, g: &[f64], time: f64) -> Result<StepRecord> {
        let base_space = Arc::new(build_dofmap(mesh, &prev.crack));
        let anchor = transfer_field(&prev.field, &base_space)?;
        let (mut u, mut e) = self.solver.penalized_minimizer(mesh, base_space, g, anchor.values(), self.lambda)?;
        let mut crack = prev.crack.clone();
        let mut evaluated = 1;

        loop {
            let candidates = admissible_extensions(mesh, &crack, self.m, self.policy)?;
            let results = self.evaluate(mesh, &candidates, &prev.field, g, &u, &e)?;
            evaluated += candidates.len();

            let threshold = e.total - self.rel_tol * e.total.abs().max(1.0);
            // candidates are ordered by (added edges, edge ids), so the first
            // minimal total wins ties
            let mut best: Option<usize> = None;
            for (i, (_, ei)) in results.iter().enumerate() {
                if ei.total < threshold && best.is_none_or(|b| ei.total < results[b].1.total) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let (ub, eb) = results.into_iter().nth(b).expect("index in range");
            crack = candidates.into_iter().nth(b).expect("index in range");
            u = ub;
            e = eb;
            if !self.policy.iterated() {
                break;
            }
        }

        let increment_norm = l2_distance(mesh, &u, &prev.field)?;
        Ok(StepRecord {
            index: prev.index + 1,
            time,
            crack,
            field: u,
            energies: e,
            increment_norm,
            candidates_evaluated: evaluated,
        })
    }

    /// Penalized minimizers for every candidate. A candidate whose DOF space
    /// equals the base space has the base minimizer.
    fn evaluate(
        &self,
        mesh: &Mesh,
        candidates: &[CrackSet],
        anchor: &Field,
        g: &[f64],
        base_u: &Field,
        base_e: &EnergyBreakdown,
    ) -> Result<Vec<(Field, EnergyBreakdown)>> {
        candidates
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let space = Arc::new(build_dofmap(mesh, c));
                if space.n_dofs() == base_u.space().n_dofs() {
                    let u = Field::new(base_u.values().to_vec(), space);
                    let e = EnergyBreakdown::new(base_e.bulk, c.total_length(), base_e.penalty);
                    return Ok((u, e));
                }
                transfer_field(anchor, &space)
                    .and_then(|w| self.solver.penalized_minimizer(mesh, space, g, w.values(), self.lambda))
                    .map_err(|err| Error::Candidate { candidate: i, edges: c.edges().to_vec(), source: Box::new(err) })
            })
            .collect()
    }

    /// Full evolution from the initial crack `k0`. Record 0 holds the
    /// harmonic displacement for `g(0)`.
    pub fn run(
        &self,
        mesh: &Mesh,
        k0: &CrackSet,
        program: &BoundaryProgram,
        schedule: Schedule,
    ) -> Result<EvolutionTrace> {
        if k0.n_components() > self.m {
            return Err(Error::ComponentBudget { found: k0.n_components(), budget: self.m });
        }
        let u0 = self.solver.harmonic(mesh, k0, &program.at(0.0))?;
        let e0 = crate::solver::energy(mesh, k0, &u0)?;
        let mut records = vec![StepRecord {
            index: 0,
            time: 0.0,
            crack: k0.clone(),
            field: u0,
            energies: e0,
            increment_norm: 0.0,
            candidates_evaluated: 0,
        }];
        for i in 1..=schedule.steps() {
            let t = schedule.time(i);
            let next = self.step(mesh, records.last().expect("nonempty"), &program.at(t), t)?;
            records.push(next);
        }
        Ok(EvolutionTrace {
            schedule,
            lambda: self.lambda,
            m: self.m,
            policy: self.policy,
            mesh_id: mesh.fingerprint(),
            initial_crack: k0.clone(),
            records,
        })
    }
}

pub fn step(
    mesh: &Mesh,
    prev: &StepRecord,
    g: &[f64],
    time: f64,
    lambda: PenaltyWeight,
    m: usize,
    policy: ExtensionPolicy,
) -> Result<StepRecord> {
    Evolution::new(lambda, m, policy).step(mesh, prev, g, time)
}

pub fn run(
    mesh: &Mesh,
    k0: &CrackSet,
    program: &BoundaryProgram,
    schedule: Schedule,
    lambda: PenaltyWeight,
    m: usize,
    policy: ExtensionPolicy,
) -> Result<EvolutionTrace> {
    Evolution::new(lambda, m, policy).run(mesh, k0, program, schedule)
}

/// Piecewise-constant interpolant: the record in force at `t`.
pub fn interpolate(trace: &EvolutionTrace, t: f64) -> Result<(&Field, &CrackSet)> {
    let i = trace.schedule.index_at(t)?;
    let r = &trace.records[i.min(trace.records.len() - 1)];
    Ok((&r.field, &r.crack))
}

/// `2∫ₛᵗ (∇u^δ(τ)|∇ġ(τ)) dτ` with `u^δ` piecewise constant in time. Since
/// `∇u^δ` is frozen on each record interval, each piece integrates `ġ`
/// exactly to `g(b) − g(a)`.
pub fn work_integral(mesh: &Mesh, trace: &EvolutionTrace, program: &BoundaryProgram, s: f64, t: f64) -> Result<f64> {
    if t < s {
        return Err(Error::Invalid(format!("work integral needs s ≤ t, got s = {s}, t = {t}")));
    }
    if s == t || program.modes().is_empty() {
        return Ok(0.0);
    }
    let first = trace.schedule.index_at(s)?;
    let last = trace.schedule.index_at(t)?;
    let n = trace.records.len();
    let mut acc = 0.0;
    for r in first..=last.min(n - 1) {
        let lo = s.max(trace.schedule.time(r));
        let hi = if r + 1 < n { t.min(trace.schedule.time(r + 1)) } else { t };
        if hi <= lo {
            continue;
        }
        let dc = program.coefficient_increment(lo, hi);
        for (mode, c) in program.modes().iter().zip(dc) {
            if c != 0.0 {
                acc += 2.0 * c * gradient_product(mesh, &trace.records[r].field, &mode.spatial);
            }
        }
    }
    Ok(acc)
}

/// `σ(δ)·∫₀ᵀ(‖∇ġ‖ + λ‖ġ‖)dτ` with `σ(δ) = maxᵣ ∫ over [t_r, t_{r+1}] of
/// (‖∇ġ‖ + ‖ġ‖)`: the slack of the discrete energy estimate.
pub fn rho(program: &BoundaryProgram, schedule: Schedule, lambda: PenaltyWeight) -> f64 {
    let sigma = (0..schedule.steps())
        .map(|r| {
            let (g, v) = program.rate_integrals(schedule.time(r), schedule.time(r + 1));
            g + v
        })
        .fold(0.0, f64::max);
    let (g, v) = program.rate_integrals(0.0, schedule.end());
    sigma * (g + lambda.value() * v)
}
