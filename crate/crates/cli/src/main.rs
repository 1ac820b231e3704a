use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsfrac_cli::run::{failure_summary, write_summary};
use qsfrac_cli::{compare_runs, parse_config, run_scenario, sweep, Checks, ExitStatus, RunOptions};

#[derive(Parser)]
#[command(name = "qsfrac", version, about = "Quasi-static brittle fracture in antiplane shear")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and its checks.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of balance,minimality,griffith.
        #[arg(long, default_value = "balance,minimality,griffith")]
        checks: String,
        #[arg(long)]
        svg: bool,
    },
    /// Compare the cracks and energies of two finished runs.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Run a scenario once per parameter value.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "balance,minimality,griffith")]
        checks: String,
    },
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = qsfrac_cli::init_threads() {
        eprintln!("error: {e}");
        return exit(ExitStatus::ConfigError);
    }
    match cli.command {
        Command::Run { config, out, checks, svg } => {
            let checks = match Checks::parse(&checks) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(ExitStatus::ConfigError);
                }
            };
            let cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}", serde_json::json!({ "status": "config_error", "error": e.to_string() }));
                    return exit(ExitStatus::ConfigError);
                }
            };
            match run_scenario(&cfg, &RunOptions { out: out.clone(), checks, svg }) {
                Ok(o) => {
                    println!("{}", serde_json::to_string_pretty(&o.summary).expect("summary serializes"));
                    exit(o.summary.status)
                }
                Err(e) => {
                    let summary = failure_summary(&e);
                    if let Some(dir) = out.or(cfg.output_dir) {
                        let _ = std::fs::create_dir_all(&dir).and_then(|_| write_summary(&dir, &summary));
                    }
                    eprintln!("{}", serde_json::to_string(&summary).expect("summary serializes"));
                    exit(e.status())
                }
            }
        }
        Command::Compare { dir_a, dir_b } => match compare_runs(&dir_a, &dir_b) {
            Ok(c) => {
                println!("i,t,hausdorff,d_bulk,d_surface,d_total");
                for r in &c.rows {
                    println!(
                        "{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
                        r.i, r.t, r.hausdorff, r.d_bulk, r.d_surface, r.d_total
                    );
                }
                match c.first_divergence {
                    Some(t) => println!("# first divergence: t = {t}"),
                    None => println!("# first divergence: none"),
                }
                exit(ExitStatus::Pass)
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(ExitStatus::ConfigError)
            }
        },
        Command::Sweep { config, param, values, out, checks } => {
            let parsed = Checks::parse(&checks).and_then(|c| parse_config(&config).map(|cfg| (c, cfg)));
            let (checks, cfg) = match parsed {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(ExitStatus::ConfigError);
                }
            };
            let Some(root) = out.or_else(|| cfg.output_dir.clone()) else {
                eprintln!("error: output_dir: no output directory given");
                return exit(ExitStatus::ConfigError);
            };
            let opts = RunOptions { out: None, checks, svg: false };
            match sweep(&cfg, &param, &values, &root, &opts) {
                Ok(results) => {
                    let mut worst = ExitStatus::Pass;
                    for (v, r) in results {
                        let status = match r {
                            Ok(s) => s.status,
                            Err(e) => {
                                eprintln!("{param} = {v}: {e}");
                                e.status()
                            }
                        };
                        println!("{param} = {v}: {:?} (exit {})", status, status.code());
                        if status.code() > worst.code() {
                            worst = status;
                        }
                    }
                    exit(worst)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(ExitStatus::ConfigError)
                }
            }
        }
    }
}
