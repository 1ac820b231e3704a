use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qsfrac_core::analysis::{
    balance_pairs, discrete_energy_estimate, energy_balance_check, griffith_check, minimality_check, write_rows_csv,
    CheckSummary, TOL_G,
};
use qsfrac_core::EvolutionTrace;
use serde::Serialize;

use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::svg;

/// Random record pairs added to the consecutive ones in the balance check.
const RANDOM_BALANCE_PAIRS: usize = 20;
/// Random superset probes per step in the minimality check.
const MINIMALITY_PROBES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Pass,
    CheckFailure,
    ConfigError,
    SolverFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::CheckFailure => 1,
            ExitStatus::ConfigError => 2,
            ExitStatus::SolverFailure => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(#[from] qsfrac_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn status(&self) -> ExitStatus {
        match self {
            RunError::Config(_) => ExitStatus::ConfigError,
            RunError::Solver(_) | RunError::Io(_) => ExitStatus::SolverFailure,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    pub balance: bool,
    pub minimality: bool,
    pub griffith: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Self { balance: true, minimality: true, griffith: true }
    }
}

impl Checks {
    pub const NONE: Checks = Checks { balance: false, minimality: false, griffith: false };

    /// Parses a comma-separated list such as `balance,griffith`.
    pub fn parse(list: &str) -> Result<Self, ConfigError> {
        let mut c = Self::NONE;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "balance" => c.balance = true,
                "minimality" => c.minimality = true,
                "griffith" => c.griffith = true,
                other => {
                    return Err(ConfigError { path: "--checks".into(), message: format!("unknown check {other:?}") })
                }
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    pub checks: Checks,
    pub svg: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub status: ExitStatus,
    pub checks: usize,
    pub passes: usize,
    pub worst_slack: Option<f64>,
    pub reports: BTreeMap<String, ReportSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    #[serde(flatten)]
    pub counts: CheckSummary,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub struct RunOutcome {
    pub summary: RunSummary,
    pub trace: EvolutionTrace,
    pub scenario: Scenario,
    pub out_dir: PathBuf,
}

/// Runs the scenario, writes all artifacts and evaluates the enabled checks.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let out_dir = opts
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| ConfigError { path: "output_dir".into(), message: "no output directory given".into() })?;
    let scenario = config.build()?;
    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("config.json"), config.to_json())?;
    fs::write(out_dir.join("mesh.json"), serde_json::to_string(&scenario.mesh.to_json()).expect("mesh serializes"))?;

    let trace =
        scenario.evolution.run(&scenario.mesh, &scenario.initial_crack, &scenario.program, scenario.schedule)?;
    trace.write_dir(&scenario.mesh, &out_dir)?;

    let mesh = &scenario.mesh;
    let program = &scenario.program;
    let mut reports = BTreeMap::new();

    if opts.checks.balance {
        let pairs = balance_pairs(trace.records.len(), RANDOM_BALANCE_PAIRS, config.seed);
        let report = discrete_energy_estimate(mesh, &trace, program, &pairs)?;
        write_rows_csv(&out_dir.join("balance.csv"), &report.rows)?;
        reports.insert("balance".into(), ReportSummary { counts: (&report).into(), applicable: true, note: None });

        // the continuous-time form is reported, not gated
        let times: Vec<(f64, f64)> = trace.records.windows(2).map(|w| (w[0].time, w[1].time)).collect();
        let harmonic = energy_balance_check(mesh, &trace, program, &times)?;
        write_rows_csv(&out_dir.join("balance_harmonic.csv"), &harmonic.rows)?;
    }

    if opts.checks.minimality {
        let mut rows = Vec::new();
        let mut counts = CheckSummary::default();
        for i in 1..trace.records.len() {
            let r = minimality_check(mesh, &trace, i, MINIMALITY_PROBES, config.seed.wrapping_add(i as u64))?;
            counts.merge(&(&r).into());
            rows.extend(r.rows.into_iter().map(MinimalityCsvRow::from));
        }
        write_rows_csv(&out_dir.join("minimality.csv"), &rows)?;
        reports.insert("minimality".into(), ReportSummary { counts, applicable: true, note: None });
    }

    if opts.checks.griffith {
        let report = griffith_check(mesh, &trace, program, TOL_G)?;
        write_rows_csv(&out_dir.join("griffith.csv"), &report.rows)?;
        reports.insert(
            "griffith".into(),
            ReportSummary { counts: (&report).into(), applicable: report.applicable, note: report.reason.clone() },
        );
    }

    if opts.svg {
        // best effort: a failed frame never changes the outcome
        if let Err(e) = svg::write_frames(mesh, &trace, &out_dir.join("svg")) {
            eprintln!("warning: svg output failed: {e}");
        }
    }

    let mut total = CheckSummary::default();
    for r in reports.values() {
        total.merge(&r.counts);
    }
    let status = if total.passed() { ExitStatus::Pass } else { ExitStatus::CheckFailure };
    let summary = RunSummary {
        status,
        checks: total.checks,
        passes: total.passes,
        worst_slack: total.worst_slack,
        reports,
        error: None,
    };
    write_summary(&out_dir, &summary)?;
    Ok(RunOutcome { summary, trace, scenario, out_dir })
}

pub fn write_summary(dir: &Path, summary: &RunSummary) -> std::io::Result<()> {
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary).expect("summary serializes"))
}

/// Summary for a run that stopped with an error.
pub fn failure_summary(err: &RunError) -> RunSummary {
    RunSummary {
        status: err.status(),
        checks: 0,
        passes: 0,
        worst_slack: None,
        reports: BTreeMap::new(),
        error: Some(err.to_string()),
    }
}

/// Probe row with the added edges flattened for CSV.
#[derive(Serialize)]
struct MinimalityCsvRow {
    step: usize,
    added: String,
    probe_energy: f64,
    reference: f64,
    slack: f64,
    pass: bool,
}

impl From<qsfrac_core::analysis::ProbeRow> for MinimalityCsvRow {
    fn from(r: qsfrac_core::analysis::ProbeRow) -> Self {
        let added = r.added.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ");
        Self { step: r.step, added, probe_energy: r.probe_energy, reference: r.reference, slack: r.slack, pass: r.pass }
    }
}

/// Outcome of one sweep point.
pub type SweepResult = (f64, Result<RunSummary, RunError>);

/// Runs the configuration once per value of `param`, each in its own
/// subdirectory of `out`.
pub fn sweep(
    config: &ScenarioConfig,
    param: &str,
    values: &[f64],
    out: &Path,
    opts: &RunOptions,
) -> Result<Vec<SweepResult>, ConfigError> {
    if param != "lambda" {
        return Err(ConfigError {
            path: "--param".into(),
            message: format!("cannot sweep {param:?}; supported: lambda"),
        });
    }
    let mut results = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = config.clone();
        c.lambda = v;
        let dir = out.join(format!("{param}_{v}"));
        c.output_dir = Some(dir.clone());
        let o = RunOptions { out: Some(dir.clone()), ..opts.clone() };
        let res = run_scenario(&c, &o).map(|r| r.summary);
        if let Err(e) = &res {
            let _ = fs::create_dir_all(&dir).and_then(|_| write_summary(&dir, &failure_summary(e)));
        }
        results.push((v, res));
    }
    Ok(results)
}
