use serde::Serialize;

use super::hausdorff_distance;
use crate::error::{Error, Result};
use crate::evolution::{interpolate, BoundaryProgram, Evolution, EvolutionTrace, Schedule};
use crate::mesh::{CrackSet, Mesh};
use crate::solver::harmonic_energy;

/// Everything but the time step of an evolution.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub initial_crack: CrackSet,
    pub program: BoundaryProgram,
    pub end: f64,
    pub evolution: Evolution,
}

impl Scenario {
    pub fn run(&self, mesh: &Mesh, delta: f64) -> Result<EvolutionTrace> {
        self.evolution.run(mesh, &self.initial_crack, &self.program, Schedule::new(self.end, delta)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub t: f64,
    /// Hausdorff distance to the crack of the finest run at `t`.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub deltas: Vec<f64>,
    pub times: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// `|total_T(δ) − total_T(δ_min)|` per δ.
    pub final_energy_gaps: Vec<f64>,
}

impl ConvergenceTable {
    pub fn distance(&self, delta_index: usize, time_index: usize) -> f64 {
        self.rows[delta_index * self.times.len() + time_index].distance
    }

    /// Fraction of sampled times at which the distance to the finest run does
    /// not grow when δ is refined.
    pub fn nonincreasing_fraction(&self) -> f64 {
        let nt = self.times.len();
        if nt == 0 || self.deltas.len() < 2 {
            return 1.0;
        }
        let mut good = 0;
        for k in 0..nt {
            let ok = (1..self.deltas.len()).all(|d| self.distance(d, k) <= self.distance(d - 1, k) + 1e-12);
            if ok {
                good += 1;
            }
        }
        good as f64 / nt as f64
    }
}

/// Runs `scenario` at each δ (strictly decreasing) and compares cracks with
/// the finest run at the sampled times.
pub fn delta_convergence_study(
    mesh: &Mesh,
    scenario: &Scenario,
    deltas: &[f64],
    times: &[f64],
) -> Result<ConvergenceTable> {
    if deltas.is_empty() || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("time steps must be strictly decreasing".into()));
    }
    let traces: Vec<EvolutionTrace> = deltas.iter().map(|&d| scenario.run(mesh, d)).collect::<Result<_>>()?;
    let finest = traces.last().expect("nonempty");
    let mut rows = Vec::with_capacity(deltas.len() * times.len());
    for (tr, &delta) in traces.iter().zip(deltas) {
        for &t in times {
            let (_, k) = interpolate(tr, t)?;
            let (_, kf) = interpolate(finest, t)?;
            rows.push(ConvergenceRow { delta, t, distance: hausdorff_distance(mesh, k, kf) });
        }
    }
    let ef = finest.last().energies.total;
    let final_energy_gaps = traces.iter().map(|tr| (tr.last().energies.total - ef).abs()).collect();
    Ok(ConvergenceTable { deltas: deltas.to_vec(), times: times.to_vec(), rows, final_energy_gaps })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub j: usize,
    pub t: f64,
    pub s: f64,
    /// `[ℰ(g(t), K(s)) − ℰ(g(t), K(t))] / (s − t)`.
    pub slope: f64,
    /// Harmonic energy `ℰ(g(t), K(t))`.
    pub energy: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeReport {
    pub tol_slope: f64,
    pub rows: Vec<SlopeRow>,
}

impl SlopeReport {
    pub fn max_slope(&self) -> f64 {
        self.rows.iter().map(|r| r.slope).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Backward difference quotients of the harmonic energy in the crack
/// variable, for `s = t_{j−1}, t_{j−2}`. A row passes when the quotient is at
/// most `tol_slope·(1 + ℰ(g(t), K(t)))`.
pub fn derivative_slope_check(
    mesh: &Mesh,
    trace: &EvolutionTrace,
    program: &BoundaryProgram,
    tol_slope: f64,
) -> Result<SlopeReport> {
    let n = trace.records.len();
    if n < 4 {
        return Err(Error::Invalid(format!("slope check needs at least 3 steps, trace has {}", n - 1)));
    }
    let mut rows = Vec::new();
    for j in 2..n {
        let rj = &trace.records[j];
        let g = program.at(rj.time);
        let mut here: Option<f64> = None;
        for back in [1, 2] {
            let rs = &trace.records[j - back];
            let e_t = match here {
                Some(e) => e,
                None => *here.insert(harmonic_energy(mesh, &rj.crack, &g)?.total),
            };
            let num = if rs.crack == rj.crack { 0.0 } else { harmonic_energy(mesh, &rs.crack, &g)?.total - e_t };
            let slope = num / (rs.time - rj.time);
            rows.push(SlopeRow {
                j,
                t: rj.time,
                s: rs.time,
                slope,
                energy: e_t,
                pass: slope <= tol_slope * (1.0 + e_t.abs()),
            });
        }
    }
    Ok(SlopeReport { tol_slope, rows })
}
