//! Scenario files, the run driver and run comparison for `qsfrac`.

pub mod compare;
pub mod config;
pub mod run;
mod svg;

pub use compare::{compare_runs, CompareError, CompareRow, Comparison};
pub use config::{parse_config, parse_config_str, ConfigError, Scenario, ScenarioConfig};
pub use run::{run_scenario, sweep, Checks, ExitStatus, RunError, RunOptions, RunOutcome, RunSummary};

/// Sizes the global thread pool from `QC_THREADS` when it is set.
pub fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QC_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("QC_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("QC_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}
