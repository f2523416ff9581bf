//! Batch driver: parameter sweeps over (Γ, λ, η, L), persistent result
//! tables, interior-extremum detection, and finite-size critical-strength
//! estimation.
//!
//! Sweeps write one CSV row per (grid point, observable) incrementally and can
//! resume after an interruption: completed points are skipped, partially
//! written points are recomputed, and per-point seeds depend only on the grid
//! enumeration index, so the resumed table is byte-identical to an
//! uninterrupted run.

use crate::ensemble::{
    self, AveragingMode, InitialState, SamplingProtocol, Unraveling,
};
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::params::{default_dt, JumpParams, ModelParams};
use crate::state::DensityMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};

/// Exact CSV schema, in column order.
pub const CSV_HEADER: &str = "Gamma,lambda,eta,L,observable,mean,stderr,n_traj,seed,dt,incidents";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnravelingKind {
    #[default]
    Qsd,
    /// Two-outcome measurements with faulty readout; the `lambda` grid column
    /// then holds the jump measurement rate γ_jump, and the readout fidelity
    /// is derived from η via Δ = (1 + √η)/2.
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    #[default]
    Neel,
    Mixed,
}

fn default_t_burn() -> f64 {
    SamplingProtocol::default().t_burn
}
fn default_t_window() -> f64 {
    SamplingProtocol::default().t_window
}
fn default_sample_interval() -> f64 {
    SamplingProtocol::default().sample_interval
}
fn default_n_traj() -> usize {
    SamplingProtocol::default().n_traj
}
fn default_master_seed() -> u64 {
    1
}

/// Flat sweep configuration (TOML on disk; CLI flags may override fields).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Field-noise strengths Γ.
    pub gamma: Vec<f64>,
    /// Measurement strengths λ (γ_jump for the jump unraveling).
    pub lambda: Vec<f64>,
    /// Detector efficiencies η.
    pub eta: Vec<f64>,
    /// Chain lengths L.  May be left empty in config files: the desk-scale
    /// defaults are {4, 6, 8, 10} when every η is 1 (pure states) and
    /// {4, 6, 8} otherwise (density matrices).
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Observable names, e.g. ["concurrence", "neg_half"].
    pub observables: Vec<String>,
    #[serde(default)]
    pub unraveling: UnravelingKind,
    #[serde(default)]
    pub initial: InitialKind,
    #[serde(default = "default_t_burn")]
    pub t_burn: f64,
    #[serde(default = "default_t_window")]
    pub t_window: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub mode: AveragingMode,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Integrator step override; per-point default rule when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Output base path; rows land in `<output>.csv`, the report in
    /// `<output>.json`.
    pub output: PathBuf,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        if cfg.sizes.is_empty() {
            cfg.sizes = if cfg.eta.iter().all(|&e| e == 1.0) {
                vec![4, 6, 8, 10]
            } else {
                vec![4, 6, 8]
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("gamma", &self.gamma), ("lambda", &self.lambda), ("eta", &self.eta)]
        {
            if grid.is_empty() {
                return Err(Error::Config(format!("{name} grid must be non-empty")));
            }
            for &v in grid {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Config(format!("{name} grid value {v} is invalid")));
                }
            }
        }
        for &e in &self.eta {
            if e > 1.0 {
                return Err(Error::Config(format!("eta grid value {e} exceeds 1")));
            }
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes grid must be non-empty".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::Config("observable list must be non-empty".into()));
        }
        let observables = self.parsed_observables()?;
        for &l in &self.sizes {
            for obs in &observables {
                obs.validate_for(l)?;
            }
        }
        if let Some(dt) = self.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(Error::Config(format!("dt override {dt} is invalid")));
            }
        }
        if self.unraveling == UnravelingKind::Jump {
            for &lam in &self.lambda {
                if lam <= 0.0 {
                    return Err(Error::Config(
                        "jump unraveling needs gamma_jump (lambda column) > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn parsed_observables(&self) -> Result<Vec<Observable>> {
        self.observables.iter().map(|s| s.parse::<Observable>()).collect()
    }

    pub fn protocol(&self) -> SamplingProtocol {
        SamplingProtocol {
            t_burn: self.t_burn,
            t_window: self.t_window,
            sample_interval: self.sample_interval,
            n_traj: self.n_traj,
            mode: self.mode,
        }
    }

    /// Grid enumeration in the canonical (L, Γ, λ, η) nesting order; per-point
    /// seeds derive from this index, never from execution order.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let mut points = Vec::new();
        let mut index = 0u64;
        for &sites in &self.sizes {
            for &gamma in &self.gamma {
                for &lambda in &self.lambda {
                    for &eta in &self.eta {
                        points.push(GridPoint { index, sites, gamma, lambda, eta });
                        index += 1;
                    }
                }
            }
        }
        points
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.with_extension("csv")
    }

    pub fn json_path(&self) -> PathBuf {
        self.output.with_extension("json")
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: u64,
    pub sites: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub eta: f64,
}

impl GridPoint {
    fn key(&self) -> PointKey {
        (self.gamma.to_bits(), self.lambda.to_bits(), self.eta.to_bits(), self.sites)
    }
}

type PointKey = (u64, u64, u64, usize);

// ---------------------------------------------------------------------------
// Result rows
// ---------------------------------------------------------------------------

/// One (grid point, observable) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub gamma: f64,
    pub lambda: f64,
    pub eta: f64,
    pub sites: usize,
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub dt: f64,
    pub incidents: usize,
}

impl ResultRow {
    fn key(&self) -> PointKey {
        (self.gamma.to_bits(), self.lambda.to_bits(), self.eta.to_bits(), self.sites)
    }

    fn to_csv_line(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{},{},{:.16e},{}\n",
            self.gamma,
            self.lambda,
            self.eta,
            self.sites,
            self.observable,
            self.mean,
            self.stderr,
            self.n_traj,
            self.seed,
            self.dt,
            self.incidents
        )
    }

    fn from_csv_record(fields: &[&str]) -> Result<Self> {
        if fields.len() != 11 {
            return Err(Error::AnalysisInput(format!(
                "expected 11 CSV fields, got {}",
                fields.len()
            )));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::AnalysisInput(format!("field {i} ({}): {e}", fields[i])))
        };
        let u = |i: usize| -> Result<u64> {
            fields[i]
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::AnalysisInput(format!("field {i} ({}): {e}", fields[i])))
        };
        Ok(ResultRow {
            gamma: f(0)?,
            lambda: f(1)?,
            eta: f(2)?,
            sites: u(3)? as usize,
            observable: fields[4].trim().to_string(),
            mean: f(5)?,
            stderr: f(6)?,
            n_traj: u(7)? as usize,
            seed: u(8)?,
            dt: f(9)?,
            incidents: u(10)? as usize,
        })
    }
}

/// Parse a result table written by [`run_sweep`] / [`emit_report`].
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 {
            if line != CSV_HEADER {
                return Err(Error::AnalysisInput(format!(
                    "unexpected CSV header: {line}"
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        rows.push(ResultRow::from_csv_record(&fields)?);
    }
    Ok(rows)
}

/// Write a full result table (header plus one line per row), replacing any
/// existing file.  Inverse of [`read_rows`].
pub fn write_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweep driver
// ---------------------------------------------------------------------------

/// Resolve a grid point into runnable pieces: model parameters (with the
/// step-size rule applied), the unraveling, and the initial state.
pub fn point_setup(
    config: &SweepConfig,
    point: &GridPoint,
) -> Result<(ModelParams, Unraveling, InitialState)> {
    let (dynamic_lambda, unraveling) = match config.unraveling {
        UnravelingKind::Qsd => (point.lambda, Unraveling::Qsd),
        UnravelingKind::Jump => {
            let delta = JumpParams::delta_from_eta(point.eta)?;
            (0.0, Unraveling::Jump(JumpParams::new(point.lambda, delta)?))
        }
    };
    let mut params = ModelParams::new(point.sites, point.gamma, dynamic_lambda, point.eta)?;
    // the default step rule must also respect the jump rate, which lives in
    // the lambda grid column for jump sweeps
    let dt = config.dt.unwrap_or_else(|| default_dt(point.gamma, point.lambda));
    params = params.with_dt(dt)?;
    let initial = match config.initial {
        InitialKind::Neel => InitialState::Neel,
        InitialKind::Mixed => InitialState::Density(DensityMatrix::fully_mixed(point.sites)),
    };
    Ok((params, unraveling, initial))
}

/// Evaluate one grid point.
fn evaluate_point(
    config: &SweepConfig,
    point: &GridPoint,
    observables: &[Observable],
) -> Result<Vec<ResultRow>> {
    let (params, unraveling, initial) = point_setup(config, point)?;
    let protocol = config.protocol();
    let seed = ensemble::derive_seed(config.master_seed, point.index);
    let run = ensemble::steady_state_run(&params, &unraveling, &protocol, seed, &initial, observables)?;
    Ok(run
        .stats
        .iter()
        .map(|s| ResultRow {
            gamma: point.gamma,
            lambda: point.lambda,
            eta: point.eta,
            sites: point.sites,
            observable: s.observable.name().to_string(),
            mean: s.mean,
            stderr: s.stderr,
            n_traj: s.n_traj,
            seed,
            dt: params.dt,
            incidents: run.incidents,
        })
        .collect())
}

/// Run the whole sweep, appending rows to `<output>.csv` point by point.
/// Existing complete points are skipped (crash resume); partially written
/// points are recomputed.  Returns the full table in canonical grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let observables = config.parsed_observables()?;
    let points = config.grid_points();
    let csv_path = config.csv_path();
    if let Some(dir) = csv_path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }

    // load completed points from a previous (possibly interrupted) run
    let mut done: HashMap<PointKey, Vec<ResultRow>> = HashMap::new();
    if csv_path.exists() {
        let mut by_key: HashMap<PointKey, Vec<ResultRow>> = HashMap::new();
        for row in read_rows(&csv_path)? {
            by_key.entry(row.key()).or_default().push(row);
        }
        for (key, rows) in by_key {
            let complete = rows.len() == observables.len()
                && observables
                    .iter()
                    .all(|o| rows.iter().any(|r| r.observable == o.name()));
            if complete {
                done.insert(key, rows);
            }
        }
    }

    // rewrite the file with only the complete points, in canonical order,
    // so the final byte stream is independent of where a crash happened
    let mut table: Vec<ResultRow> = Vec::new();
    let mut kept: Vec<ResultRow> = Vec::new();
    for point in &points {
        if let Some(rows) = done.get(&point.key()) {
            for obs in &observables {
                let row = rows
                    .iter()
                    .find(|r| r.observable == obs.name())
                    .expect("completeness checked above");
                kept.push(row.clone());
            }
        }
    }
    write_rows(&csv_path, &kept)?;

    let mut file = fs::OpenOptions::new().append(true).open(&csv_path)?;
    for point in &points {
        if let Some(rows) = done.get(&point.key()) {
            for obs in &observables {
                let row = rows
                    .iter()
                    .find(|r| r.observable == obs.name())
                    .expect("completeness checked above");
                table.push(row.clone());
            }
            continue;
        }
        let rows = evaluate_point(config, point, &observables)?;
        let mut block = String::new();
        for row in &rows {
            block.push_str(&row.to_csv_line());
        }
        file.write_all(block.as_bytes())?;
        file.flush()?;
        table.extend(rows);
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Non-monotonicity detection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

/// A statistically significant interior extremum of a swept curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumReport {
    pub kind: ExtremumKind,
    /// Abscissa of the extremum after quadratic refinement.
    pub location: f64,
    /// Half the span of the three refinement points.
    pub uncertainty: f64,
    /// Index of the extremal grid point in the input curve.
    pub index: usize,
    /// Smaller of the two boundary separations, in combined standard errors.
    pub significance: f64,
}

/// Scan a curve of (abscissa, mean, stderr), sorted by abscissa, for an
/// interior extremum that clears both boundary values by more than two
/// combined standard errors.  Returns `None` for monotonic (or statistically
/// flat) curves.
pub fn detect_nonmonotonicity(curve: &[(f64, f64, f64)]) -> Result<Option<ExtremumReport>> {
    if curve.len() < 4 {
        return Err(Error::AnalysisInput(format!(
            "need at least 4 points, got {}",
            curve.len()
        )));
    }
    for w in curve.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::AnalysisInput(format!(
                "curve must be strictly sorted by abscissa ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    for &(x, m, se) in curve {
        if !x.is_finite() || !m.is_finite() || !se.is_finite() || se < 0.0 {
            return Err(Error::AnalysisInput(format!(
                "non-finite or negative entry at abscissa {x}: mean {m}, stderr {se}"
            )));
        }
    }

    let n = curve.len();
    let sigmas = |i: usize, j: usize| -> f64 {
        let (_, mi, si) = curve[i];
        let (_, mj, sj) = curve[j];
        (mi - mj) / (si * si + sj * sj).sqrt().max(1e-300)
    };

    let mut best: Option<ExtremumReport> = None;
    for kind in [ExtremumKind::Maximum, ExtremumKind::Minimum] {
        let sign = match kind {
            ExtremumKind::Maximum => 1.0,
            ExtremumKind::Minimum => -1.0,
        };
        // most extreme interior point
        let i = (1..n - 1)
            .max_by(|&a, &b| {
                (sign * curve[a].1)
                    .partial_cmp(&(sign * curve[b].1))
                    .expect("finite means")
            })
            .expect("interior points exist");
        let left = sign * sigmas(i, 0);
        let right = sign * sigmas(i, n - 1);
        let significance = left.min(right);
        if significance > 2.0 {
            let report = ExtremumReport {
                kind,
                location: refine_quadratic(curve, i),
                uncertainty: 0.5 * (curve[i + 1].0 - curve[i - 1].0),
                index: i,
                significance,
            };
            let better = match &best {
                None => true,
                Some(b) => report.significance > b.significance,
            };
            if better {
                best = Some(report);
            }
        }
    }
    Ok(best)
}

/// Vertex of the parabola through points i−1, i, i+1, clamped to that span.
fn refine_quadratic(curve: &[(f64, f64, f64)], i: usize) -> f64 {
    let (x0, y0, _) = curve[i - 1];
    let (x1, y1, _) = curve[i];
    let (x2, y2, _) = curve[i + 1];
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curvature = (d1 - d0) / (x2 - x0);
    if curvature.abs() < 1e-300 {
        return x1;
    }
    // vertex of y = y1 + d0 (x − x0m) + c (x − x0m)(x − x1m) in Newton form
    let vertex = 0.5 * (x0 + x1 - d0 / curvature);
    vertex.clamp(x0, x2)
}

// ---------------------------------------------------------------------------
// Critical measurement strength from finite-size dependence
// ---------------------------------------------------------------------------

/// Finite-size critical-strength estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEstimate {
    pub lambda_crit: f64,
    /// Half the local grid spacing at the crossing (minimum resolution).
    pub uncertainty: f64,
    pub observable: String,
    pub gamma: f64,
    pub eta: f64,
    /// True when |D| never crosses the threshold inside the swept range.
    pub at_boundary: bool,
    pub method: String,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Estimate the critical measurement strength at fixed (Γ, η) from the size
/// dependence of `observable` between the smallest and largest L in `rows`.
/// D(λ) = (O(L_max) − O(L_min)) / combined stderr; λ_crit interpolates the
/// last downward crossing of |D| through 2.
pub fn estimate_critical_lambda(
    rows: &[ResultRow],
    observable: &str,
    gamma: f64,
    eta: f64,
) -> Result<CriticalEstimate> {
    let selected: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.observable == observable && close(r.gamma, gamma) && close(r.eta, eta))
        .collect();
    if selected.is_empty() {
        return Err(Error::AnalysisInput(format!(
            "no rows for observable {observable} at Gamma={gamma}, eta={eta}"
        )));
    }
    let mut sizes: Vec<usize> = selected.iter().map(|r| r.sites).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::AnalysisInput(format!(
            "need at least 3 system sizes, found {:?}",
            sizes
        )));
    }
    let l_min = sizes[0];
    let l_max = *sizes.last().expect("non-empty");

    let mut lambdas: Vec<f64> = Vec::new();
    for r in &selected {
        if !lambdas.iter().any(|&l| close(l, r.lambda)) {
            lambdas.push(r.lambda);
        }
    }
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite lambda"));
    if lambdas.len() < 5 {
        return Err(Error::AnalysisInput(format!(
            "need at least 5 lambda values, found {}",
            lambdas.len()
        )));
    }

    let lookup = |lambda: f64, sites: usize| -> Result<(f64, f64)> {
        selected
            .iter()
            .find(|r| close(r.lambda, lambda) && r.sites == sites)
            .map(|r| (r.mean, r.stderr))
            .ok_or_else(|| {
                Error::AnalysisInput(format!(
                    "missing row: lambda={lambda}, L={sites} for {observable}"
                ))
            })
    };

    let mut d_values = Vec::with_capacity(lambdas.len());
    for &lam in &lambdas {
        let (m_max, s_max) = lookup(lam, l_max)?;
        let (m_min, s_min) = lookup(lam, l_min)?;
        let d = (m_max - m_min) / (s_max * s_max + s_min * s_min).sqrt().max(1e-300);
        d_values.push(d);
    }

    let threshold = 2.0;
    // last downward crossing of |D| through the threshold along increasing λ
    let mut crossing: Option<(usize, f64)> = None;
    for k in 0..d_values.len() - 1 {
        let a = d_values[k].abs();
        let b = d_values[k + 1].abs();
        if a >= threshold && b < threshold {
            let frac = if (a - b).abs() < 1e-300 { 0.5 } else { (a - threshold) / (a - b) };
            let lam = lambdas[k] + frac * (lambdas[k + 1] - lambdas[k]);
            crossing = Some((k, lam));
        }
    }

    let estimate = match crossing {
        Some((k, lam)) => CriticalEstimate {
            lambda_crit: lam,
            uncertainty: 0.5 * (lambdas[k + 1] - lambdas[k]),
            observable: observable.to_string(),
            gamma,
            eta,
            at_boundary: false,
            method: "size-dependence-threshold".into(),
        },
        None => {
            // no crossing: everything size-independent (boundary at λ_min)
            // or still size-dependent at λ_max
            let all_flat = d_values.iter().all(|d| d.abs() < threshold);
            let (lam, spacing) = if all_flat {
                (lambdas[0], lambdas[1] - lambdas[0])
            } else {
                (
                    *lambdas.last().expect("non-empty"),
                    lambdas[lambdas.len() - 1] - lambdas[lambdas.len() - 2],
                )
            };
            CriticalEstimate {
                lambda_crit: lam,
                uncertainty: 0.5 * spacing,
                observable: observable.to_string(),
                gamma,
                eta,
                at_boundary: true,
                method: "size-dependence-threshold".into(),
            }
        }
    };
    Ok(estimate)
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

/// Full report: resolved configuration echo plus any critical estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub estimates: Vec<CriticalEstimate>,
}

/// Write `<output>.csv` (fixed schema) and `<output>.json` (config echo and
/// estimates).  Byte-stable for identical inputs.
pub fn emit_report(
    config: &SweepConfig,
    rows: &[ResultRow],
    estimates: &[CriticalEstimate],
) -> Result<()> {
    write_rows(&config.csv_path(), rows)?;
    let report = SweepReport { config: config.clone(), estimates: estimates.to_vec() };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    fs::write(config.json_path(), json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_config(dir: &Path) -> SweepConfig {
        SweepConfig {
            gamma: vec![0.5],
            lambda: vec![0.4],
            eta: vec![1.0],
            sizes: vec![2],
            observables: vec!["concurrence".into(), "sz_1".into()],
            unraveling: UnravelingKind::Qsd,
            initial: InitialKind::Neel,
            t_burn: 1.0,
            t_window: 1.0,
            sample_interval: 0.5,
            n_traj: 6,
            mode: AveragingMode::TimeAndTrajectory,
            master_seed: 5,
            dt: None,
            output: dir.join("run"),
        }
    }

    #[test]
    fn config_toml_round_trip_and_defaults() {
        let text = r#"
            gamma = [0.1, 0.2]
            lambda = [1.0]
            eta = [1.0]
            sizes = [2, 4]
            observables = ["neg_half"]
            output = "out/sweep"
        "#;
        let cfg = SweepConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.n_traj, 500);
        assert_eq!(cfg.t_burn, 50.0);
        assert_eq!(cfg.master_seed, 1);
        assert_eq!(cfg.unraveling, UnravelingKind::Qsd);
        assert_eq!(cfg.csv_path(), PathBuf::from("out/sweep.csv"));
    }

    #[test]
    fn config_rejects_bad_input() {
        // unknown key
        assert!(SweepConfig::from_toml_str(
            "gamma=[1.0]\nlambda=[1.0]\neta=[1.0]\nsizes=[2]\nobservables=[\"sz_1\"]\noutput=\"x\"\nbogus=1"
        )
        .is_err());
        // empty grid
        assert!(SweepConfig::from_toml_str(
            "gamma=[]\nlambda=[1.0]\neta=[1.0]\nsizes=[2]\nobservables=[\"sz_1\"]\noutput=\"x\""
        )
        .is_err());
        // odd L with a half-system observable
        assert!(SweepConfig::from_toml_str(
            "gamma=[1.0]\nlambda=[1.0]\neta=[1.0]\nsizes=[3]\nobservables=[\"neg_half\"]\noutput=\"x\""
        )
        .is_err());
        // eta out of range
        assert!(SweepConfig::from_toml_str(
            "gamma=[1.0]\nlambda=[1.0]\neta=[1.5]\nsizes=[2]\nobservables=[\"sz_1\"]\noutput=\"x\""
        )
        .is_err());
        // unknown observable
        assert!(SweepConfig::from_toml_str(
            "gamma=[1.0]\nlambda=[1.0]\neta=[1.0]\nsizes=[2]\nobservables=[\"entropy\"]\noutput=\"x\""
        )
        .is_err());
    }

    #[test]
    fn csv_header_is_the_documented_schema() {
        assert_eq!(
            CSV_HEADER,
            "Gamma,lambda,eta,L,observable,mean,stderr,n_traj,seed,dt,incidents"
        );
    }

    #[test]
    fn single_point_sweep_matches_direct_ensemble_call() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2);

        let observables = cfg.parsed_observables().unwrap();
        let params = ModelParams::new(2, 0.5, 0.4, 1.0).unwrap();
        let seed = ensemble::derive_seed(cfg.master_seed, 0);
        let run = ensemble::steady_state_run(
            &params,
            &Unraveling::Qsd,
            &cfg.protocol(),
            seed,
            &InitialState::Neel,
            &observables,
        )
        .unwrap();
        for (row, stat) in rows.iter().zip(run.stats.iter()) {
            assert_eq!(row.mean.to_bits(), stat.mean.to_bits());
            assert_eq!(row.stderr.to_bits(), stat.stderr.to_bits());
            assert_eq!(row.seed, seed);
            assert_eq!(row.incidents, run.incidents);
        }
    }

    #[test]
    fn sweep_resumes_to_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.gamma = vec![0.3, 0.6];
        cfg.lambda = vec![0.2, 0.5];
        let full = run_sweep(&cfg).unwrap();
        let reference = fs::read(cfg.csv_path()).unwrap();
        assert_eq!(full.len(), 2 * 2 * 2);

        // simulate a crash: keep the header, the first complete point, and a
        // partial second point (one of its two observable rows)
        let text = String::from_utf8(reference.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let truncated: String = lines[..4].join("\n") + "\n";
        fs::write(cfg.csv_path(), truncated).unwrap();

        let resumed = run_sweep(&cfg).unwrap();
        let resumed_bytes = fs::read(cfg.csv_path()).unwrap();
        assert_eq!(resumed_bytes, reference, "resumed CSV differs from uninterrupted run");
        for (a, b) in full.iter().zip(resumed.iter()) {
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        }
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let rows = run_sweep(&cfg).unwrap();
        let parsed = read_rows(&cfg.csv_path()).unwrap();
        assert_eq!(rows.len(), parsed.len());
        for (a, b) in rows.iter().zip(parsed.iter()) {
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            assert_eq!(a.dt.to_bits(), b.dt.to_bits());
            assert_eq!(a.observable, b.observable);
            assert_eq!(a.seed, b.seed);
        }
    }

    #[test]
    fn jump_sweep_smoke_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.unraveling = UnravelingKind::Jump;
        cfg.lambda = vec![1.5]; // gamma_jump
        cfg.eta = vec![0.57];
        cfg.observables = vec!["concurrence_sq".into()];
        cfg.n_traj = 4;
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].mean.is_finite());
        // dt rule treats the jump rate like lambda: 0.05/1.5
        assert_abs_diff_eq!(rows[0].dt, 0.05 / 1.5, epsilon = 1e-15);
    }

    #[test]
    fn detector_ignores_monotonic_curves() {
        let curve: Vec<(f64, f64, f64)> =
            (0..6).map(|i| (i as f64, 1.0 - 0.1 * i as f64, 0.001)).collect();
        assert!(detect_nonmonotonicity(&curve).unwrap().is_none());
        let rising: Vec<(f64, f64, f64)> =
            (0..6).map(|i| (i as f64, 0.1 * i as f64, 0.001)).collect();
        assert!(detect_nonmonotonicity(&rising).unwrap().is_none());
    }

    #[test]
    fn detector_finds_synthetic_parabola_peak() {
        // peak at Γ = 2 on a grid of spacing 0.5
        let curve: Vec<(f64, f64, f64)> = (0..9)
            .map(|i| {
                let x = 0.5 * i as f64;
                (x, 1.0 - 0.3 * (x - 2.0) * (x - 2.0), 0.005)
            })
            .collect();
        let report = detect_nonmonotonicity(&curve).unwrap().expect("peak exists");
        assert_eq!(report.kind, ExtremumKind::Maximum);
        assert_abs_diff_eq!(report.location, 2.0, epsilon = 0.5);
        assert!(report.significance > 2.0);
        // quadratic refinement should land much closer than the grid spacing
        assert_abs_diff_eq!(report.location, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn detector_finds_interior_minimum() {
        let curve: Vec<(f64, f64, f64)> = (0..7)
            .map(|i| {
                let x = i as f64;
                (x, 0.2 + 0.05 * (x - 3.2) * (x - 3.2), 0.002)
            })
            .collect();
        let report = detect_nonmonotonicity(&curve).unwrap().expect("dip exists");
        assert_eq!(report.kind, ExtremumKind::Minimum);
        assert_abs_diff_eq!(report.location, 3.2, epsilon = 0.5);
    }

    #[test]
    fn detector_requires_statistical_significance() {
        // interior wiggle smaller than the error bars → flat verdict
        let curve = vec![
            (0.0, 0.50, 0.05),
            (1.0, 0.52, 0.05),
            (2.0, 0.55, 0.05),
            (3.0, 0.51, 0.05),
            (4.0, 0.49, 0.05),
        ];
        assert!(detect_nonmonotonicity(&curve).unwrap().is_none());
    }

    #[test]
    fn detector_is_scale_invariant() {
        let base: Vec<(f64, f64, f64)> = (0..8)
            .map(|i| {
                let x = i as f64;
                (x, 2.0 - 0.1 * (x - 3.0) * (x - 3.0), 0.01)
            })
            .collect();
        let scaled: Vec<(f64, f64, f64)> =
            base.iter().map(|&(x, m, s)| (x, 1234.5 * m, 1234.5 * s)).collect();
        let a = detect_nonmonotonicity(&base).unwrap().unwrap();
        let b = detect_nonmonotonicity(&scaled).unwrap().unwrap();
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.index, b.index);
        assert_abs_diff_eq!(a.location, b.location, epsilon = 1e-12);
        assert_abs_diff_eq!(a.significance, b.significance, epsilon = 1e-9);
    }

    #[test]
    fn detector_rejects_bad_input() {
        assert!(detect_nonmonotonicity(&[(0.0, 1.0, 0.1), (1.0, 2.0, 0.1)]).is_err());
        let unsorted = vec![
            (0.0, 1.0, 0.1),
            (2.0, 1.0, 0.1),
            (1.0, 1.0, 0.1),
            (3.0, 1.0, 0.1),
        ];
        assert!(detect_nonmonotonicity(&unsorted).is_err());
    }

    fn synthetic_rows(transition: f64) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        for &lam in &[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0] {
            for &l in &[4usize, 6, 8] {
                let mean = if lam < transition { 0.05 * l as f64 } else { 0.2 };
                rows.push(ResultRow {
                    gamma: 0.1,
                    lambda: lam,
                    eta: 1.0,
                    sites: l,
                    observable: "neg_half".into(),
                    mean,
                    stderr: 0.01,
                    n_traj: 100,
                    seed: 0,
                    dt: 0.01,
                    incidents: 0,
                });
            }
        }
        rows
    }

    #[test]
    fn critical_estimator_finds_synthetic_transition() {
        let rows = synthetic_rows(3.0);
        let est = estimate_critical_lambda(&rows, "neg_half", 0.1, 1.0).unwrap();
        assert!(!est.at_boundary);
        assert!(
            (est.lambda_crit - 3.0).abs() <= 0.5,
            "lambda_crit = {} should be 3.0 ± grid spacing",
            est.lambda_crit
        );
        assert_abs_diff_eq!(est.uncertainty, 0.25, epsilon = 1e-12);
        assert_eq!(est.method, "size-dependence-threshold");
    }

    #[test]
    fn critical_estimator_flags_boundaries() {
        // size-independent everywhere → boundary at λ_min
        let mut flat = synthetic_rows(0.0);
        for r in &mut flat {
            r.mean = 0.2;
        }
        let est = estimate_critical_lambda(&flat, "neg_half", 0.1, 1.0).unwrap();
        assert!(est.at_boundary);
        assert_abs_diff_eq!(est.lambda_crit, 1.0, epsilon = 1e-12);

        // size-dependent everywhere → boundary at λ_max
        let steep = synthetic_rows(100.0);
        let est = estimate_critical_lambda(&steep, "neg_half", 0.1, 1.0).unwrap();
        assert!(est.at_boundary);
        assert_abs_diff_eq!(est.lambda_crit, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn critical_estimator_validates_input() {
        let rows = synthetic_rows(3.0);
        // wrong observable
        assert!(estimate_critical_lambda(&rows, "parity_half", 0.1, 1.0).is_err());
        // too few sizes
        let two_sizes: Vec<ResultRow> =
            rows.iter().filter(|r| r.sites != 8).cloned().collect();
        assert!(estimate_critical_lambda(&two_sizes, "neg_half", 0.1, 1.0).is_err());
        // too few lambdas
        let few: Vec<ResultRow> =
            rows.iter().filter(|r| r.lambda < 2.2).cloned().collect();
        assert!(estimate_critical_lambda(&few, "neg_half", 0.1, 1.0).is_err());
    }

    #[test]
    fn report_json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path());
        let rows = synthetic_rows(3.0);
        let est = estimate_critical_lambda(&rows, "neg_half", 0.1, 1.0).unwrap();
        emit_report(&cfg, &rows, std::slice::from_ref(&est)).unwrap();

        let text = fs::read_to_string(cfg.json_path()).unwrap();
        let report: SweepReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.estimates.len(), 1);
        assert_eq!(report.estimates[0], est);
        assert_eq!(report.config, cfg);

        // byte stability
        emit_report(&cfg, &rows, std::slice::from_ref(&est)).unwrap();
        let again = fs::read_to_string(cfg.json_path()).unwrap();
        assert_eq!(text, again);

        // empty estimates still yields a report with an empty array
        emit_report(&cfg, &rows, &[]).unwrap();
        let empty: SweepReport =
            serde_json::from_str(&fs::read_to_string(cfg.json_path()).unwrap()).unwrap();
        assert!(empty.estimates.is_empty());
    }
}
