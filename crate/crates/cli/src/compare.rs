use std::fs;
use std::path::{Path, PathBuf};

use qsfrac_core::analysis::hausdorff_distance;
use qsfrac_core::evolution::CrackSnapshot;
use qsfrac_core::mesh::MeshJson;
use qsfrac_core::{CrackSet, Mesh};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error("runs use different meshes")]
    MeshMismatch,
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] qsfrac_core::Error),
}

fn read_err(path: &Path, e: impl std::fmt::Display) -> CompareError {
    CompareError::Read { path: path.to_path_buf(), message: e.to_string() }
}

#[derive(Clone, Debug, Deserialize)]
struct TraceRow {
    i: usize,
    t: f64,
    bulk: f64,
    surface: f64,
    total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub i: usize,
    pub t: f64,
    pub hausdorff: f64,
    pub d_bulk: f64,
    pub d_surface: f64,
    pub d_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// First time at which the two cracks differ.
    pub first_divergence: Option<f64>,
}

struct RunDir {
    trace: Vec<TraceRow>,
    cracks: Vec<CrackSnapshot>,
}

fn load(dir: &Path) -> Result<(MeshJson, RunDir), CompareError> {
    let mesh_path = dir.join("mesh.json");
    let text = fs::read_to_string(&mesh_path).map_err(|e| read_err(&mesh_path, e))?;
    let mesh: MeshJson = serde_json::from_str(&text).map_err(|e| read_err(&mesh_path, e))?;

    let trace_path = dir.join("trace.csv");
    let mut rdr =
        csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&trace_path).map_err(|e| read_err(&trace_path, e))?;
    let trace = rdr.deserialize().collect::<Result<Vec<TraceRow>, _>>().map_err(|e| read_err(&trace_path, e))?;

    let mut cracks = Vec::with_capacity(trace.len());
    for row in &trace {
        let p = dir.join("cracks").join(format!("step_{:04}.json", row.i));
        let text = fs::read_to_string(&p).map_err(|e| read_err(&p, e))?;
        cracks.push(serde_json::from_str(&text).map_err(|e| read_err(&p, e))?);
    }
    Ok((mesh, RunDir { trace, cracks }))
}

/// Index of the record of `run` in force at time `t`.
fn in_force(run: &RunDir, t: f64) -> usize {
    let scale = t.abs().max(1.0);
    run.trace.iter().rposition(|r| r.t <= t + 1e-9 * scale).unwrap_or(0)
}

/// Compares two completed runs on the same mesh at the record times of the
/// first one.
pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> Result<Comparison, CompareError> {
    let (mesh_a, a) = load(dir_a)?;
    let (mesh_b, b) = load(dir_b)?;
    if mesh_a != mesh_b {
        return Err(CompareError::MeshMismatch);
    }
    let mesh = Mesh::from_json(&mesh_a)?;
    let mut rows = Vec::with_capacity(a.trace.len());
    let mut first_divergence = None;
    for (k, ra) in a.trace.iter().enumerate() {
        let kb = in_force(&b, ra.t);
        let rb = &b.trace[kb];
        let ca = CrackSet::new(&mesh, a.cracks[k].edge_ids.iter().copied())?;
        let cb = CrackSet::new(&mesh, b.cracks[kb].edge_ids.iter().copied())?;
        let hausdorff = hausdorff_distance(&mesh, &ca, &cb);
        if ca != cb && first_divergence.is_none() {
            first_divergence = Some(ra.t);
        }
        rows.push(CompareRow {
            i: ra.i,
            t: ra.t,
            hausdorff,
            d_bulk: rb.bulk - ra.bulk,
            d_surface: rb.surface - ra.surface,
            d_total: rb.total - ra.total,
        });
    }
    Ok(Comparison { rows, first_divergence })
}
