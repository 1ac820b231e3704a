use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{interpolate, rho, work_integral, BoundaryProgram, EvolutionTrace};
use crate::mesh::Mesh;
use crate::solver::harmonic_energy;

/// Relative tolerance on the energy inequalities.
pub const BALANCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceRow {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rho: f64,
    /// `rhs − lhs`; negative means the inequality is violated.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    pub rho: f64,
    /// Energy scale `E` of the trace; rows pass when `slack ≥ −tol·(1 + E)`.
    pub energy_scale: f64,
    pub rows: Vec<BalanceRow>,
}

impl BalanceReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }
}

fn energy_scale(trace: &EvolutionTrace) -> f64 {
    trace.records.iter().map(|r| r.energies.bulk + r.energies.surface).fold(0.0, f64::max)
}

/// Discrete estimate between records `i < j`:
///
/// `bulk_j + surface_j + λ Σ_{h=i+1}^{j} ‖u_h − u_{h−1}‖²
///   ≤ bulk_i + surface_i + 2∫(∇u^δ|∇ġ) + ρ(δ)`.
pub fn discrete_energy_estimate(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    program: &BoundaryProgram,
    pairs: &[(usize, usize)],
) -> Result<BalanceReport> {
    let n = trace.records.len();
    let rho = rho(program, trace.schedule, trace.lambda);
    let scale = energy_scale(trace);
    let lam = trace.lambda.value();
    let mut rows = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        if i >= j || j >= n {
            return Err(Error::Invalid(format!("record pair ({i}, {j}) is not ordered within 0..{n}")));
        }
        let (ri, rj) = (&trace.records[i], &trace.records[j]);
        let dissipation: f64 = trace.records[i + 1..=j].iter().map(|r| r.increment_norm * r.increment_norm).sum();
        let lhs = rj.energies.bulk + rj.energies.surface + lam * dissipation;
        let work = work_integral(mesh, trace, program, ri.time, rj.time)?;
        let rhs = ri.energies.bulk + ri.energies.surface + work + rho;
        let slack = rhs - lhs;
        rows.push(BalanceRow {
            i,
            j,
            s: ri.time,
            t: rj.time,
            lhs,
            rhs,
            rho,
            slack,
            pass: slack >= -BALANCE_TOL * (1.0 + scale),
        });
    }
    Ok(BalanceReport { rho, energy_scale: scale, rows })
}

/// Continuous-time balance `ℰ(g(t), K(t)) − ℰ(g(s), K(s)) ≤ 2∫ₛᵗ(∇u^δ|∇ġ) + ρ(δ)`
/// with ℰ the harmonic energy of the interpolated crack, solved afresh.
pub fn energy_balance_check(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    program: &BoundaryProgram,
    pairs: &[(f64, f64)],
) -> Result<BalanceReport> {
    let rho = rho(program, trace.schedule, trace.lambda);
    let scale = energy_scale(trace);
    let mut rows = Vec::with_capacity(pairs.len());
    for &(s, t) in pairs {
        if s.is_nan() || t.is_nan() || s >= t {
            return Err(Error::Invalid(format!("balance pair needs s < t, got ({s}, {t})")));
        }
        let (_, ks) = interpolate(trace, s)?;
        let (_, kt) = interpolate(trace, t)?;
        let es = harmonic_energy(mesh, ks, &program.at(s))?;
        let et = harmonic_energy(mesh, kt, &program.at(t))?;
        let lhs = et.total - es.total;
        let rhs = work_integral(mesh, trace, program, s, t)? + rho;
        let slack = rhs - lhs;
        rows.push(BalanceRow {
            i: trace.schedule.index_at(s)?,
            j: trace.schedule.index_at(t)?,
            s,
            t,
            lhs,
            rhs,
            rho,
            slack,
            pass: slack >= -BALANCE_TOL * (1.0 + scale),
        });
    }
    Ok(BalanceReport { rho, energy_scale: scale, rows })
}

/// Every consecutive pair plus `extra` random ordered pairs.
pub fn balance_pairs(n_records: usize, extra: usize, seed: u64) -> Vec<(usize, usize)> {
    use rand::{Rng, SeedableRng};
    let mut pairs: Vec<(usize, usize)> = (1..n_records).map(|j| (j - 1, j)).collect();
    if n_records >= 2 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..extra {
            let a = rng.random_range(0..n_records);
            let mut b = rng.random_range(0..n_records - 1);
            if b >= a {
                b += 1;
            }
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs
}
