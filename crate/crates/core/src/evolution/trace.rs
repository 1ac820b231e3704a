use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{rho, BoundaryProgram, Schedule};
use crate::error::Result;
use crate::mesh::{CrackSet, EdgeId, ExtensionPolicy, Mesh, Point};
use crate::solver::{EnergyBreakdown, Field, PenaltyWeight};

pub const TRACE_COLUMNS: [&str; 11] = [
    "i",
    "t",
    "n_crack_edges",
    "crack_length",
    "n_components",
    "bulk",
    "surface",
    "penalty",
    "total",
    "increment_norm",
    "candidates_evaluated",
];

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub index: usize,
    pub time: f64,
    pub crack: CrackSet,
    pub field: Field,
    pub energies: EnergyBreakdown,
    /// `‖u_i − u_{i−1}‖` in the lumped L² norm.
    pub increment_norm: f64,
    pub candidates_evaluated: usize,
}

#[derive(Clone, Debug)]
pub struct EvolutionTrace {
    pub schedule: Schedule,
    pub lambda: PenaltyWeight,
    pub m: usize,
    pub policy: ExtensionPolicy,
    pub mesh_id: u64,
    pub initial_crack: CrackSet,
    pub records: Vec<StepRecord>,
}

/// Crack of one record, as written to `cracks/step_XXXX.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrackSnapshot {
    pub step: usize,
    pub t: f64,
    pub edge_ids: Vec<EdgeId>,
    pub segments: Vec<[Point; 2]>,
}

impl EvolutionTrace {
    pub fn last(&self) -> &StepRecord {
        self.records.last().expect("a trace has at least the initial record")
    }

    pub fn final_crack(&self) -> &CrackSet {
        &self.last().crack
    }

    /// First record whose crack differs from the initial one.
    pub fn first_growth(&self) -> Option<&StepRecord> {
        self.records.iter().find(|r| r.crack != self.initial_crack)
    }

    pub fn max_increment(&self) -> f64 {
        self.records.iter().map(|r| r.increment_norm).fold(0.0, f64::max)
    }

    pub fn snapshot(&self, mesh: &Mesh, i: usize) -> CrackSnapshot {
        let r = &self.records[i];
        CrackSnapshot { step: r.index, t: r.time, edge_ids: r.crack.edges().to_vec(), segments: r.crack.segments(mesh) }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# search: {} iterated greedy (restricted minimization)", self.policy)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_COLUMNS)?;
        for r in &self.records {
            let e = &r.energies;
            w.write_record([
                r.index.to_string(),
                fmt(r.time),
                r.crack.len().to_string(),
                fmt(r.crack.total_length()),
                r.crack.n_components().to_string(),
                fmt(e.bulk),
                fmt(e.surface),
                fmt(e.penalty),
                fmt(e.total),
                fmt(r.increment_norm),
                r.candidates_evaluated.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `trace.csv` and one crack snapshot per record under `dir`.
    pub fn write_dir(&self, mesh: &Mesh, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir.join("cracks"))?;
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("trace.csv"))?))?;
        for i in 0..self.records.len() {
            let snap = self.snapshot(mesh, i);
            let f = std::fs::File::create(dir.join("cracks").join(format!("step_{:04}.json", snap.step)))?;
            serde_json::to_writer(std::io::BufWriter::new(f), &snap)?;
        }
        Ok(())
    }

    /// Bounds implied by the discrete energy estimate, independent of δ:
    /// `(sup bulk, sup surface, λΣ‖u_r − u_{r−1}‖²)`.
    pub fn a_priori_bound(&self, program: &BoundaryProgram) -> AprioriBound {
        let e0 = &self.records[0].energies;
        let start = e0.bulk + e0.surface;
        let (a, _) = program.rate_integrals(0.0, self.schedule.end());
        let r = rho(program, self.schedule, self.lambda);
        let root = a + (a * a + start + r).sqrt();
        let bulk = root * root;
        let rest = start + r + 2.0 * bulk.sqrt() * a;
        AprioriBound { bulk, surface: rest, dissipation: rest }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AprioriBound {
    pub bulk: f64,
    pub surface: f64,
    pub dissipation: f64,
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}
