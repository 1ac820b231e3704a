//! Diagnostics over computed evolutions.

mod balance;
mod griffith;
mod hausdorff;
mod minimality;
mod study;

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub use balance::{
    balance_pairs, discrete_energy_estimate, energy_balance_check, BalanceReport, BalanceRow, BALANCE_TOL,
};
pub use griffith::{griffith_check, release_rate, GriffithReport, GriffithRow, TOL_G};
pub use hausdorff::{hausdorff_distance, segment_hausdorff};
pub use minimality::{
    minimality_check, minimality_check_with, random_supersets, MinimalityReport, ProbeRow, MINIMALITY_TOL,
};
pub use study::{
    delta_convergence_study, derivative_slope_check, ConvergenceRow, ConvergenceTable, Scenario, SlopeReport, SlopeRow,
};

/// Counts over the rows of one or more reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub checks: usize,
    pub passes: usize,
    /// Smallest slack seen; `None` when nothing was checked.
    pub worst_slack: Option<f64>,
}

impl CheckSummary {
    pub fn add(&mut self, pass: bool, slack: f64) {
        self.checks += 1;
        if pass {
            self.passes += 1;
        }
        self.worst_slack = Some(self.worst_slack.map_or(slack, |w| w.min(slack)));
    }

    pub fn merge(&mut self, other: &CheckSummary) {
        self.checks += other.checks;
        self.passes += other.passes;
        if let Some(s) = other.worst_slack {
            self.worst_slack = Some(self.worst_slack.map_or(s, |w| w.min(s)));
        }
    }

    pub fn passed(&self) -> bool {
        self.passes == self.checks
    }
}

impl From<&BalanceReport> for CheckSummary {
    fn from(r: &BalanceReport) -> Self {
        let mut s = Self::default();
        r.rows.iter().for_each(|row| s.add(row.pass, row.slack));
        s
    }
}

impl From<&MinimalityReport> for CheckSummary {
    fn from(r: &MinimalityReport) -> Self {
        let mut s = Self::default();
        r.rows.iter().for_each(|row| s.add(row.pass, row.slack));
        s
    }
}

impl From<&GriffithReport> for CheckSummary {
    fn from(r: &GriffithReport) -> Self {
        let mut s = Self::default();
        for row in &r.rows {
            let slack =
                if row.advancing { r.tol_g - (1.0 - row.release_rate).abs() } else { 1.0 + r.tol_g - row.release_rate };
            s.add(row.pass, slack);
        }
        s
    }
}

/// Writes serializable rows as CSV with a header.
pub fn write_rows_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
