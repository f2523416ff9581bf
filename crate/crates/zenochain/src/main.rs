//! Command-line front end: parameter sweeps, single-trajectory dumps,
//! self-verification, and post-hoc curve analysis.
//!
//! Exit codes: 0 on success, 1 for configuration/input problems, 2 for
//! numerical failures (including failed verification checks).

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zenochain::ensemble::{self};
use zenochain::error::{Error, Result};
use zenochain::oracles;
use zenochain::sweep::{
    self, ExtremumReport, ResultRow, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "zenochain",
    version,
    about = "Trajectory sweeps for a continuously monitored spin chain with noisy fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML config file.
    ///
    /// Results append to `<output>.csv` point by point; rerunning after an
    /// interruption skips completed grid points.  A JSON report with the
    /// resolved configuration lands next to the CSV.
    Sweep {
        /// Path to the sweep configuration (TOML).
        config: PathBuf,
        /// Override the master seed from the config file.
        #[arg(long)]
        master_seed: Option<u64>,
        /// Override the number of trajectories per grid point.
        #[arg(long)]
        n_traj: Option<usize>,
        /// Override the integrator step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the output base path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print one trajectory's observable time series as CSV on stdout.
    ///
    /// Uses the first grid point of the config and the same per-trajectory
    /// seed the sweep would use for `--index`.
    Trajectory {
        /// Path to the sweep configuration (TOML).
        config: PathBuf,
        /// Trajectory index within the ensemble (selects the seed).
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// Override the master seed from the config file.
        #[arg(long)]
        master_seed: Option<u64>,
        /// Override the integrator step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run the built-in verification oracles and report each check.
    Verify,
    /// Estimate the critical measurement strength from a result table.
    Critical {
        /// CSV result table produced by `sweep`.
        rows: PathBuf,
        /// Observable name (`neg_half`/`parity_half`; aliases: negativity, parity).
        #[arg(long)]
        observable: String,
        /// Field-noise strength Γ selecting the slice.
        #[arg(long)]
        gamma: f64,
        /// Detector efficiency η selecting the slice.
        #[arg(long)]
        eta: f64,
    },
    /// Detect an interior extremum of an observable against Gamma.
    Extremum {
        /// CSV result table produced by `sweep`.
        rows: PathBuf,
        /// Measurement strength λ selecting the slice.
        #[arg(long)]
        lambda: f64,
        /// Detector efficiency η selecting the slice.
        #[arg(long)]
        eta: f64,
        /// Observable name (default: concurrence).
        #[arg(long, default_value = "concurrence")]
        observable: String,
        /// Chain length; required only when the table holds several.
        #[arg(long)]
        sites: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(
    path: &Path,
    master_seed: Option<u64>,
    n_traj: Option<usize>,
    dt: Option<f64>,
    output: Option<PathBuf>,
) -> Result<SweepConfig> {
    let mut config = SweepConfig::from_file(path)?;
    if let Some(seed) = master_seed {
        config.master_seed = seed;
    }
    if let Some(n) = n_traj {
        config.n_traj = n;
    }
    if let Some(step) = dt {
        config.dt = Some(step);
    }
    if let Some(out) = output {
        config.output = out;
    }
    config.validate()?;
    Ok(config)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Accept a few readable aliases for the finite-size observables.
fn resolve_observable(name: &str) -> String {
    match name {
        "negativity" | "epsilon" => "neg_half".to_string(),
        "parity" => "parity_half".to_string(),
        other => other.to_string(),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep { config, master_seed, n_traj, dt, output } => {
            let config = load_config(&config, master_seed, n_traj, dt, output)?;
            let rows = sweep::run_sweep(&config)?;
            sweep::emit_report(&config, &rows, &[])?;
            println!(
                "wrote {} rows to {} (report: {})",
                rows.len(),
                config.csv_path().display(),
                config.json_path().display()
            );
            Ok(())
        }
        Command::Trajectory { config, index, master_seed, dt } => {
            let config = load_config(&config, master_seed, None, dt, None)?;
            let points = config.grid_points();
            let point = points.first().expect("validated grids are non-empty");
            let (params, unraveling, initial) = sweep::point_setup(&config, point)?;
            let observables = config.parsed_observables()?;
            let protocol = config.protocol();
            let seed = ensemble::derive_seed(config.master_seed, point.index);
            let traj_seed = ensemble::derive_seed(seed, index);
            let record = ensemble::run_trajectory(
                &params,
                &unraveling,
                &protocol,
                traj_seed,
                &initial,
                &observables,
            )?;

            let mut header = String::from("time");
            for obs in &observables {
                header.push(',');
                header.push_str(obs.name());
            }
            println!("{header}");
            let n_samples = record.samples.first().map_or(0, Vec::len);
            for i in 0..n_samples {
                let mut line = format!("{:.16e}", record.samples[0][i].time);
                for series in &record.samples {
                    line.push_str(&format!(",{:.16e}", series[i].value));
                }
                println!("{line}");
            }
            Ok(())
        }
        Command::Verify => {
            let checks = oracles::run_verification();
            let total = checks.len();
            let mut failed = 0usize;
            for check in &checks {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", check.name, check.detail);
                if !check.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(Error::VerificationFailure { failed, total });
            }
            println!("all {total} verification checks passed");
            Ok(())
        }
        Command::Critical { rows, observable, gamma, eta } => {
            let table = sweep::read_rows(&rows)?;
            let name = resolve_observable(&observable);
            let estimate = sweep::estimate_critical_lambda(&table, &name, gamma, eta)?;
            let json = serde_json::to_string_pretty(&estimate)
                .map_err(|e| Error::Config(format!("estimate serialization: {e}")))?;
            println!("{json}");
            Ok(())
        }
        Command::Extremum { rows, lambda, eta, observable, sites } => {
            let table = sweep::read_rows(&rows)?;
            let name = resolve_observable(&observable);
            let slice: Vec<&ResultRow> = table
                .iter()
                .filter(|r| {
                    r.observable == name
                        && close(r.lambda, lambda)
                        && close(r.eta, eta)
                        && sites.is_none_or(|l| r.sites == l)
                })
                .collect();
            if slice.is_empty() {
                return Err(Error::AnalysisInput(format!(
                    "no rows for {name} at lambda={lambda}, eta={eta}"
                )));
            }
            let mut size_values: Vec<usize> = slice.iter().map(|r| r.sites).collect();
            size_values.sort_unstable();
            size_values.dedup();
            if size_values.len() > 1 {
                return Err(Error::AnalysisInput(format!(
                    "table holds several chain lengths {size_values:?}; pass --sites"
                )));
            }
            let mut curve: Vec<(f64, f64, f64)> =
                slice.iter().map(|r| (r.gamma, r.mean, r.stderr)).collect();
            curve.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite Gamma"));
            let report: Option<ExtremumReport> = sweep::detect_nonmonotonicity(&curve)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
            println!("{json}");
            Ok(())
        }
    }
}
