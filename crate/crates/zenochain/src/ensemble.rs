//! Seeded trajectory ensembles: burn-in, windowed sampling, and reproducible
//! aggregation of observable statistics across trajectories.
//!
//! Parallel execution is per-trajectory (each trajectory owns its RNG stream
//! and state); the final reduction always runs sequentially in trajectory-index
//! order with compensated summation, so results are bit-identical regardless of
//! how the worker pool interleaved the work.

use crate::dynamics::{self, ChainKernel};
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::params::{JumpParams, ModelParams};
use crate::state::{DensityMatrix, PureState};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use crate::C64;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Initial chain state.  The default is the Néel product state |0101…⟩.
#[derive(Debug, Clone)]
pub enum InitialState {
    Neel,
    Pure(PureState),
    Density(DensityMatrix),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Neel
    }
}

impl InitialState {
    pub fn to_pure(&self, sites: usize) -> Result<PureState> {
        match self {
            InitialState::Neel => Ok(PureState::neel(sites)),
            InitialState::Pure(psi) => {
                if psi.sites() != sites {
                    return Err(Error::DimensionMismatch(format!(
                        "initial pure state has {} sites, params say {sites}",
                        psi.sites()
                    )));
                }
                Ok(psi.clone())
            }
            InitialState::Density(_) => Err(Error::InvalidParameter(
                "density-matrix initial state has no pure representation".into(),
            )),
        }
    }

    pub fn to_density(&self, sites: usize) -> Result<DensityMatrix> {
        match self {
            InitialState::Neel => Ok(DensityMatrix::neel(sites)),
            InitialState::Pure(_) => Ok(self.to_pure(sites)?.projector()),
            InitialState::Density(rho) => {
                if rho.sites() != sites {
                    return Err(Error::DimensionMismatch(format!(
                        "initial density matrix has {} sites, params say {sites}",
                        rho.sites()
                    )));
                }
                Ok(rho.clone())
            }
        }
    }

    fn pure_representation_possible(&self) -> bool {
        !matches!(self, InitialState::Density(_))
    }
}

/// Which stochastic unraveling drives each trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Unraveling {
    /// Diffusive (homodyne-type) record with efficiency η from the params.
    Qsd,
    /// Discrete two-outcome measurements with faulty readout.
    Jump(JumpParams),
}

/// How per-trajectory values enter the ensemble average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    /// Average over the whole sampling window, then over trajectories
    /// (valid in the time-stationary steady state; lowest variance).
    #[default]
    TimeAndTrajectory,
    /// Use only the last sample of each trajectory (comparison mode).
    TrajectoryEnd,
}

/// Burn-in, sampling window and ensemble size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingProtocol {
    pub t_burn: f64,
    pub t_window: f64,
    pub sample_interval: f64,
    pub n_traj: usize,
    #[serde(default)]
    pub mode: AveragingMode,
}

impl Default for SamplingProtocol {
    fn default() -> Self {
        SamplingProtocol {
            t_burn: 50.0,
            t_window: 200.0,
            sample_interval: 1.0,
            n_traj: 500,
            mode: AveragingMode::TimeAndTrajectory,
        }
    }
}

impl SamplingProtocol {
    /// Cheap validity check against the integrator step.
    pub fn validate(&self, dt: f64) -> Result<()> {
        for (name, v) in [
            ("t_burn", self.t_burn),
            ("t_window", self.t_window),
            ("sample_interval", self.sample_interval),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "protocol {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.sample_interval <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sample_interval must be > 0, got {}",
                self.sample_interval
            )));
        }
        if self.sample_interval < dt - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "sample_interval {} is below the integrator step {dt}",
                self.sample_interval
            )));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be >= 1".into()));
        }
        Ok(())
    }

    fn schedule(&self, dt: f64) -> (u64, u64, u64) {
        let burn_steps = (self.t_burn / dt).round() as u64;
        let interval_steps = ((self.sample_interval / dt).round() as u64).max(1);
        let n_samples = (self.t_window / self.sample_interval + 1e-9).floor() as u64 + 1;
        (burn_steps, interval_steps, n_samples)
    }
}

/// One recorded observable value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSample {
    pub time: f64,
    pub value: f64,
}

/// Everything one trajectory produced.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub trajectory_id: usize,
    pub seed: u64,
    pub observables: Vec<Observable>,
    /// `samples[k]` holds the time-ordered samples of `observables[k]`.
    pub samples: Vec<Vec<ObservableSample>>,
    /// Number of sample-time positivity audits that had to clip the spectrum.
    pub positivity_incidents: usize,
}

impl TrajectoryRecord {
    /// Per-trajectory reduction of one observable under the given mode.
    pub fn reduce(&self, k: usize, mode: AveragingMode) -> f64 {
        let xs = &self.samples[k];
        match mode {
            AveragingMode::TimeAndTrajectory => {
                neumaier_sum(xs.iter().map(|s| s.value)) / xs.len() as f64
            }
            AveragingMode::TrajectoryEnd => xs.last().map(|s| s.value).unwrap_or(f64::NAN),
        }
    }
}

/// Ensemble mean and standard error of one observable.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub observable: Observable,
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
    pub params: ModelParams,
    pub protocol: SamplingProtocol,
}

/// Full result of an ensemble run: per-observable statistics plus diagnostics.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub stats: Vec<EnsembleStats>,
    /// Positivity incidents summed over successful trajectories.
    pub incidents: usize,
    /// Trajectories that aborted with an integrator failure (within the 1% budget).
    pub aborted: usize,
}

/// Force a state representation instead of letting the runner choose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateRepresentation {
    /// Pure-state path when permitted (qsd, η = 1, pure initial), else density.
    Auto,
    /// Always integrate the density matrix.
    ForceDensity,
}

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

/// Counter-based per-trajectory seed: an odd-constant index spread followed by
/// the splitmix64 finalizer.  Bijective in the index for a fixed master seed,
/// so consecutive trajectories can never collide.
pub fn derive_seed(master_seed: u64, trajectory_index: u64) -> u64 {
    let mut z = master_seed ^ trajectory_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fixed-order Neumaier (compensated) summation.
pub(crate) fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = acc + x;
        comp += if acc.abs() >= x.abs() { (acc - t) + x } else { (x - t) + acc };
        acc = t;
    }
    acc + comp
}

// ---------------------------------------------------------------------------
// Single trajectories
// ---------------------------------------------------------------------------

/// Run one seeded trajectory and record the requested observables at the
/// sample times t_burn + k·interval, k = 0..⌊t_window/interval⌋.
pub fn run_trajectory(
    params: &ModelParams,
    unraveling: &Unraveling,
    protocol: &SamplingProtocol,
    seed: u64,
    initial: &InitialState,
    observables: &[Observable],
) -> Result<TrajectoryRecord> {
    run_trajectory_with(
        params,
        unraveling,
        protocol,
        seed,
        initial,
        observables,
        StateRepresentation::Auto,
    )
}

/// As [`run_trajectory`] with an explicit representation choice (used by the
/// cross-representation consistency checks).
pub fn run_trajectory_with(
    params: &ModelParams,
    unraveling: &Unraveling,
    protocol: &SamplingProtocol,
    seed: u64,
    initial: &InitialState,
    observables: &[Observable],
    representation: StateRepresentation,
) -> Result<TrajectoryRecord> {
    params.validate()?;
    protocol.validate(params.dt)?;
    if observables.is_empty() {
        return Err(Error::Config("at least one observable must be requested".into()));
    }
    for obs in observables {
        obs.validate_for(params.sites)?;
    }
    if let Unraveling::Jump(jp) = unraveling {
        jp.epsilon(params.dt)?; // fail fast on an over-strong step
    }

    let pure_path = matches!(representation, StateRepresentation::Auto)
        && matches!(unraveling, Unraveling::Qsd)
        && params.eta == 1.0
        && initial.pure_representation_possible();

    let (burn_steps, interval_steps, n_samples) = protocol.schedule(params.dt);
    let mut kernel = ChainKernel::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: Vec<Vec<ObservableSample>> =
        vec![Vec::with_capacity(n_samples as usize); observables.len()];
    let mut incidents = 0usize;

    if pure_path {
        let mut psi = initial.to_pure(params.sites)?;
        let mut step = 0u64;
        for k in 0..n_samples {
            let target = burn_steps + k * interval_steps;
            while step < target {
                let inc = dynamics::sample_increments(params, &mut rng);
                dynamics::pure_qsd_step(&mut psi, params, &inc, &mut kernel)?;
                step += 1;
            }
            let nrm = psi.norm();
            if (nrm * nrm - 1.0).abs() > 1e-8 {
                return Err(Error::NonFinite { context: "pure-state purity at sample time" });
            }
            let time = target as f64 * params.dt;
            for (slot, obs) in samples.iter_mut().zip(observables) {
                slot.push(ObservableSample { time, value: obs.evaluate_pure(&psi)? });
            }
        }
    } else {
        let mut rho = initial.to_density(params.sites)?;
        let mut step = 0u64;
        for k in 0..n_samples {
            let target = burn_steps + k * interval_steps;
            while step < target {
                let inc = dynamics::sample_increments(params, &mut rng);
                match unraveling {
                    Unraveling::Qsd => dynamics::qsd_step(&mut rho, params, &inc, &mut kernel)?,
                    Unraveling::Jump(jp) => {
                        dynamics::jump_step(&mut rho, params, jp, &inc, &mut kernel, &mut rng)?;
                    }
                }
                step += 1;
            }
            let report = rho.hermitize_normalize(params.positivity_tol)?;
            if report.clipped {
                incidents += 1;
            }
            let time = target as f64 * params.dt;
            for (slot, obs) in samples.iter_mut().zip(observables) {
                slot.push(ObservableSample { time, value: obs.evaluate_density(&rho)? });
            }
        }
    }

    Ok(TrajectoryRecord {
        trajectory_id: 0,
        seed,
        observables: observables.to_vec(),
        samples,
        positivity_incidents: incidents,
    })
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// Run the whole ensemble and aggregate.  Trajectories execute on the rayon
/// pool; the reduction is sequential over trajectory index.  Aborted
/// trajectories beyond 1% of `n_traj` fail the run.
pub fn steady_state_run(
    params: &ModelParams,
    unraveling: &Unraveling,
    protocol: &SamplingProtocol,
    master_seed: u64,
    initial: &InitialState,
    observables: &[Observable],
) -> Result<EnsembleRun> {
    params.validate()?;
    protocol.validate(params.dt)?;
    let results: Vec<(usize, u64, Result<TrajectoryRecord>)> = (0..protocol.n_traj)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let rec = run_trajectory(params, unraveling, protocol, seed, initial, observables)
                .map(|mut r| {
                    r.trajectory_id = i;
                    r
                });
            (i, seed, rec)
        })
        .collect();

    let total = protocol.n_traj;
    let mut records = Vec::with_capacity(total);
    let mut aborted = 0usize;
    let mut first_failure: Option<String> = None;
    for (i, _seed, rec) in results {
        match rec {
            Ok(r) => records.push(r),
            Err(e) => {
                aborted += 1;
                if first_failure.is_none() {
                    first_failure = Some(format!("trajectory {i}: {e}"));
                }
            }
        }
    }
    if aborted as f64 > 0.01 * total as f64 {
        return Err(Error::TooManyAborts {
            failed: aborted,
            total,
            first: first_failure.unwrap_or_else(|| "unknown".into()),
        });
    }

    let n = records.len();
    let incidents = records.iter().map(|r| r.positivity_incidents).sum();
    let mut stats = Vec::with_capacity(observables.len());
    for (k, obs) in observables.iter().enumerate() {
        let per_traj: Vec<f64> = records.iter().map(|r| r.reduce(k, protocol.mode)).collect();
        let mean = neumaier_sum(per_traj.iter().cloned()) / n as f64;
        let stderr = if n > 1 {
            let var =
                neumaier_sum(per_traj.iter().map(|m| (m - mean) * (m - mean))) / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        stats.push(EnsembleStats {
            observable: *obs,
            mean,
            stderr,
            n_traj: n,
            params: params.clone(),
            protocol: protocol.clone(),
        });
    }
    Ok(EnsembleRun { stats, incidents, aborted })
}

/// Spec-shaped convenience wrapper: Néel initial state, statistics only.
pub fn steady_state_average(
    params: &ModelParams,
    unraveling: &Unraveling,
    protocol: &SamplingProtocol,
    master_seed: u64,
    observables: &[Observable],
) -> Result<Vec<EnsembleStats>> {
    Ok(steady_state_run(params, unraveling, protocol, master_seed, &InitialState::Neel, observables)?
        .stats)
}

/// Arithmetic mean of trajectory density matrices at `t_final` (Néel initial
/// state).  At η = 1 under the diffusive unraveling the trajectories run in
/// the pure representation and contribute their projectors.
pub fn mean_density_matrix(
    params: &ModelParams,
    unraveling: &Unraveling,
    n_traj: usize,
    t_final: f64,
    master_seed: u64,
) -> Result<DensityMatrix> {
    params.validate()?;
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be >= 1".into()));
    }
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidParameter(format!("t_final must be >= 0, got {t_final}")));
    }
    if let Unraveling::Jump(jp) = unraveling {
        jp.epsilon(params.dt)?;
    }
    let steps = (t_final / params.dt).round() as u64;
    let pure_path = matches!(unraveling, Unraveling::Qsd) && params.eta == 1.0;

    let results: Vec<(usize, Result<DMatrix<C64>>)> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(master_seed, i as u64);
            let run = || -> Result<DMatrix<C64>> {
                let mut kernel = ChainKernel::new(params)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                if pure_path {
                    let mut psi = PureState::neel(params.sites);
                    for _ in 0..steps {
                        let inc = dynamics::sample_increments(params, &mut rng);
                        dynamics::pure_qsd_step(&mut psi, params, &inc, &mut kernel)?;
                    }
                    Ok(psi.projector().matrix)
                } else {
                    let mut rho = DensityMatrix::neel(params.sites);
                    for _ in 0..steps {
                        let inc = dynamics::sample_increments(params, &mut rng);
                        match unraveling {
                            Unraveling::Qsd => {
                                dynamics::qsd_step(&mut rho, params, &inc, &mut kernel)?
                            }
                            Unraveling::Jump(jp) => {
                                dynamics::jump_step(
                                    &mut rho, params, jp, &inc, &mut kernel, &mut rng,
                                )?;
                            }
                        }
                    }
                    rho.hermitize_normalize(params.positivity_tol)?;
                    Ok(rho.matrix)
                }
            };
            (i, run())
        })
        .collect();

    let mut acc = DMatrix::<C64>::zeros(params.dim(), params.dim());
    let mut ok = 0usize;
    let mut aborted = 0usize;
    let mut first_failure: Option<String> = None;
    for (i, r) in results {
        match r {
            Ok(m) => {
                acc += m;
                ok += 1;
            }
            Err(e) => {
                aborted += 1;
                if first_failure.is_none() {
                    first_failure = Some(format!("trajectory {i}: {e}"));
                }
            }
        }
    }
    if aborted as f64 > 0.01 * n_traj as f64 || ok == 0 {
        return Err(Error::TooManyAborts {
            failed: aborted,
            total: n_traj,
            first: first_failure.unwrap_or_else(|| "unknown".into()),
        });
    }
    DensityMatrix::from_matrix(params.sites, acc / C64::new(ok as f64, 0.0))
}

/// Burn-in self-check: |mean(t_burn) − mean(2·t_burn)| in units of the
/// combined standard error, per observable.  Values ≲ 1 indicate the default
/// burn-in is long enough.
pub fn burn_in_shift_sigmas(
    params: &ModelParams,
    unraveling: &Unraveling,
    protocol: &SamplingProtocol,
    master_seed: u64,
    initial: &InitialState,
    observables: &[Observable],
) -> Result<Vec<(Observable, f64)>> {
    let short = steady_state_run(params, unraveling, protocol, master_seed, initial, observables)?;
    let mut doubled = protocol.clone();
    doubled.t_burn = 2.0 * protocol.t_burn;
    let long = steady_state_run(params, unraveling, &doubled, master_seed, initial, observables)?;
    Ok(short
        .stats
        .iter()
        .zip(long.stats.iter())
        .map(|(a, b)| {
            let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt().max(1e-300);
            (a.observable, (a.mean - b.mean).abs() / se)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::oracles;
    use crate::ONE;
    use nalgebra::DVector;
    use std::collections::HashSet;

    fn short_protocol(n_traj: usize) -> SamplingProtocol {
        SamplingProtocol {
            t_burn: 1.0,
            t_window: 2.0,
            sample_interval: 0.5,
            n_traj,
            mode: AveragingMode::TimeAndTrajectory,
        }
    }

    #[test]
    fn derive_seed_is_deterministic_and_collision_free() {
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
        let mut seen = HashSet::with_capacity(1_000_000);
        for i in 0..1_000_000u64 {
            seen.insert(derive_seed(0xDEAD_BEEF, i));
        }
        assert_eq!(seen.len(), 1_000_000, "seed collision within 10^6 consecutive indices");
    }

    #[test]
    fn bell_eigenstate_keeps_unit_concurrence() {
        // The hopping iσ⁺σ⁻ + h.c. is imaginary-antisymmetric, so its
        // eigenvectors in the one-excitation sector are (|01⟩ ± i|10⟩)/√2.
        // With Γ = λ = 0 the dynamics only change the global phase of that
        // Bell combination and every concurrence sample is 1.
        let params = ModelParams::new(2, 0.0, 0.0, 1.0).unwrap();
        let mut v = DVector::from_element(4, crate::ZERO);
        v[1] = ONE;
        v[2] = crate::IM;
        let bell = PureState::from_vector(2, v).unwrap();
        let protocol = SamplingProtocol {
            t_burn: 2.0,
            t_window: 3.0,
            sample_interval: 1.0,
            n_traj: 1,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let rec = run_trajectory(
            &params,
            &Unraveling::Qsd,
            &protocol,
            11,
            &InitialState::Pure(bell),
            &[Observable::Concurrence],
        )
        .unwrap();
        assert_eq!(rec.samples[0].len(), 4);
        for s in &rec.samples[0] {
            assert!((s.value - 1.0).abs() <= 1e-6, "C = {} at t = {}", s.value, s.time);
        }
    }

    #[test]
    fn zero_window_gives_exactly_one_sample() {
        let params = ModelParams::new(2, 0.3, 0.3, 1.0).unwrap();
        let protocol = SamplingProtocol {
            t_burn: 0.5,
            t_window: 0.0,
            sample_interval: 1.0,
            n_traj: 1,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let rec = run_trajectory(
            &params,
            &Unraveling::Qsd,
            &protocol,
            3,
            &InitialState::Neel,
            &[Observable::Concurrence, Observable::SzFirst],
        )
        .unwrap();
        assert_eq!(rec.samples.len(), 2);
        for obs_samples in &rec.samples {
            assert_eq!(obs_samples.len(), 1);
        }
    }

    #[test]
    fn samples_are_time_ordered() {
        let params = ModelParams::new(2, 0.2, 0.5, 0.7).unwrap().with_dt(0.005).unwrap();
        let rec = run_trajectory(
            &params,
            &Unraveling::Qsd,
            &short_protocol(1),
            5,
            &InitialState::Neel,
            &[Observable::SzFirst],
        )
        .unwrap();
        let times: Vec<f64> = rec.samples[0].iter().map(|s| s.time).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!((times[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn protocol_validation_rejects_bad_values() {
        let p = SamplingProtocol { sample_interval: 0.0, ..Default::default() };
        assert!(p.validate(0.01).is_err());
        let p = SamplingProtocol { sample_interval: 0.005, ..Default::default() };
        assert!(p.validate(0.01).is_err());
        let p = SamplingProtocol { n_traj: 0, ..Default::default() };
        assert!(p.validate(0.01).is_err());
        let p = SamplingProtocol { t_burn: f64::NAN, ..Default::default() };
        assert!(p.validate(0.01).is_err());
        assert!(SamplingProtocol::default().validate(0.01).is_ok());
    }

    #[test]
    fn ensemble_statistics_are_bit_reproducible() {
        let params = ModelParams::new(2, 0.4, 0.8, 1.0).unwrap();
        let protocol = short_protocol(12);
        let obs = [Observable::Concurrence, Observable::ParityHalf];
        let a = steady_state_average(&params, &Unraveling::Qsd, &protocol, 99, &obs).unwrap();
        let b = steady_state_average(&params, &Unraveling::Qsd, &protocol, 99, &obs).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.mean.to_bits(), y.mean.to_bits());
            assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
            assert_eq!(x.n_traj, y.n_traj);
        }
    }

    #[test]
    fn different_master_seeds_agree_within_errors() {
        let params = ModelParams::new(2, 0.5, 0.5, 1.0).unwrap();
        let protocol = SamplingProtocol {
            t_burn: 4.0,
            t_window: 8.0,
            sample_interval: 1.0,
            n_traj: 40,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let obs = [Observable::Concurrence];
        let a = steady_state_average(&params, &Unraveling::Qsd, &protocol, 1, &obs).unwrap();
        let b = steady_state_average(&params, &Unraveling::Qsd, &protocol, 2, &obs).unwrap();
        let se = (a[0].stderr.powi(2) + b[0].stderr.powi(2)).sqrt();
        assert!(
            (a[0].mean - b[0].mean).abs() < 4.0 * se + 0.02,
            "means {:.3} vs {:.3} with combined SE {:.3}",
            a[0].mean,
            b[0].mean,
            se
        );
    }

    #[test]
    fn pure_and_density_paths_agree_on_short_traces() {
        // Same seed and the same increments: the two representations solve
        // the same noise realization and differ only through discretization.
        // The pathwise gap at a fixed horizon shrinks as √dt (per-step O(dt)
        // differences accumulate with random signs), so quartering dt should
        // roughly halve the mean gap.
        let horizon = 0.5;
        let gap_at = |dt: f64| -> f64 {
            let params = ModelParams::new(2, 0.4, 0.6, 1.0).unwrap().with_dt(dt).unwrap();
            let protocol = SamplingProtocol {
                t_burn: horizon,
                t_window: 0.0,
                sample_interval: horizon,
                n_traj: 1,
                mode: AveragingMode::TimeAndTrajectory,
            };
            let obs = [Observable::SzFirst];
            let mut total = 0.0;
            let seeds = [1u64, 2, 3, 4, 5, 6];
            for &seed in &seeds {
                let pure = run_trajectory_with(
                    &params,
                    &Unraveling::Qsd,
                    &protocol,
                    seed,
                    &InitialState::Neel,
                    &obs,
                    StateRepresentation::Auto,
                )
                .unwrap();
                let dens = run_trajectory_with(
                    &params,
                    &Unraveling::Qsd,
                    &protocol,
                    seed,
                    &InitialState::Neel,
                    &obs,
                    StateRepresentation::ForceDensity,
                )
                .unwrap();
                total += (pure.samples[0][0].value - dens.samples[0][0].value).abs();
            }
            total / seeds.len() as f64
        };
        let coarse = gap_at(0.005);
        let fine = gap_at(0.00125);
        assert!(coarse < 0.3, "coarse-step pathwise gap too large: {coarse:.3}");
        let ratio = coarse / fine.max(1e-12);
        assert!(
            (1.2..=4.2).contains(&ratio),
            "gap should shrink ~√dt: coarse {coarse:.4}, fine {fine:.4}, ratio {ratio:.2}"
        );
    }

    #[test]
    fn unstable_run_reports_too_many_aborts() {
        // λ dt = 2 makes the density Euler map blow up almost immediately.
        let params = ModelParams::new(2, 0.0, 40.0, 0.5).unwrap().with_dt(0.05).unwrap();
        let result = steady_state_average(
            &params,
            &Unraveling::Qsd,
            &short_protocol(20),
            7,
            &[Observable::SzFirst],
        );
        match result {
            Err(Error::TooManyAborts { failed, total, first }) => {
                assert!(failed > 0 && total == 20);
                assert!(first.contains("trajectory"));
            }
            other => panic!("expected TooManyAborts, got {other:?}"),
        }
    }

    #[test]
    fn jump_and_qsd_unravelings_share_linear_observables() {
        // γ_jump = 4λ matches the unconditional generators, so the transient
        // ⟨σ_1^z⟩ means must agree between the unravelings (Δ arbitrary).
        let protocol = SamplingProtocol {
            t_burn: 1.5,
            t_window: 0.0,
            sample_interval: 1.0,
            n_traj: 150,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let obs = [Observable::SzFirst];
        let qsd_params = ModelParams::new(2, 0.3, 0.25, 0.6).unwrap().with_dt(0.01).unwrap();
        let qsd = steady_state_average(&qsd_params, &Unraveling::Qsd, &protocol, 21, &obs).unwrap();

        let jump_params = ModelParams::new(2, 0.3, 0.0, 0.6).unwrap().with_dt(0.01).unwrap();
        let jp = JumpParams::new(1.0, 0.85).unwrap();
        let jum =
            steady_state_average(&jump_params, &Unraveling::Jump(jp), &protocol, 22, &obs).unwrap();

        let se = (qsd[0].stderr.powi(2) + jum[0].stderr.powi(2)).sqrt();
        assert!(
            (qsd[0].mean - jum[0].mean).abs() < 2.0 * se + 0.02,
            "qsd {:.4}±{:.4} vs jump {:.4}±{:.4}",
            qsd[0].mean,
            qsd[0].stderr,
            jum[0].mean,
            jum[0].stderr
        );
    }

    #[test]
    fn single_trajectory_mean_equals_that_trajectory() {
        let params = ModelParams::new(2, 0.4, 0.5, 0.7).unwrap().with_dt(0.005).unwrap();
        let mean = mean_density_matrix(&params, &Unraveling::Qsd, 1, 0.5, 17).unwrap();
        // replay the same stream by hand
        let mut kernel = ChainKernel::new(&params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(17, 0));
        let mut rho = DensityMatrix::neel(2);
        for _ in 0..100 {
            let inc = dynamics::sample_increments(&params, &mut rng);
            dynamics::qsd_step(&mut rho, &params, &inc, &mut kernel).unwrap();
        }
        rho.hermitize_normalize(params.positivity_tol).unwrap();
        assert!(linalg::max_abs_diff(&mean.matrix, &rho.matrix) < 1e-12);
    }

    #[test]
    fn mean_state_tracks_the_unconditional_evolution() {
        let params = ModelParams::new(2, 0.4, 0.4, 0.6).unwrap().with_dt(0.005).unwrap();
        let mean = mean_density_matrix(&params, &Unraveling::Qsd, 250, 1.5, 31).unwrap();
        let exact = oracles::lindblad_propagate_expm(&params, &DensityMatrix::neel(2), 1.5).unwrap();
        let dist = linalg::frobenius_distance(&mean.matrix, &exact.matrix);
        assert!(dist < 0.08, "Frobenius distance to the Lindblad evolution: {dist:.3}");
    }

    #[test]
    fn eta_one_mean_state_uses_pure_path_and_matches_lindblad() {
        let params = ModelParams::new(2, 0.5, 0.5, 1.0).unwrap();
        let mean = mean_density_matrix(&params, &Unraveling::Qsd, 300, 1.0, 8).unwrap();
        let exact = oracles::lindblad_propagate_expm(&params, &DensityMatrix::neel(2), 1.0).unwrap();
        let dist = linalg::frobenius_distance(&mean.matrix, &exact.matrix);
        assert!(dist < 0.08, "Frobenius distance {dist:.3}");
    }

    #[test]
    fn trajectory_end_mode_uses_last_sample() {
        let params = ModelParams::new(2, 0.3, 0.4, 1.0).unwrap();
        let mut protocol = short_protocol(5);
        protocol.mode = AveragingMode::TrajectoryEnd;
        let run = steady_state_run(
            &params,
            &Unraveling::Qsd,
            &protocol,
            13,
            &InitialState::Neel,
            &[Observable::SzFirst],
        )
        .unwrap();
        // manual check against the raw records
        let mut expected = Vec::new();
        for i in 0..5u64 {
            let rec = run_trajectory(
                &params,
                &Unraveling::Qsd,
                &protocol,
                derive_seed(13, i),
                &InitialState::Neel,
                &[Observable::SzFirst],
            )
            .unwrap();
            expected.push(rec.samples[0].last().unwrap().value);
        }
        let mean = neumaier_sum(expected.iter().cloned()) / 5.0;
        assert!((run.stats[0].mean - mean).abs() < 1e-15);
    }

    #[test]
    fn burn_in_self_check_is_small_for_stationary_start() {
        // Stationary from the outset: the fully mixed state at η = 0 stays
        // exactly I/4, so doubling the burn-in shifts nothing.
        let params = ModelParams::new(2, 0.5, 0.5, 0.0).unwrap().with_dt(0.01).unwrap();
        let protocol = SamplingProtocol {
            t_burn: 1.0,
            t_window: 1.0,
            sample_interval: 0.5,
            n_traj: 8,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let shifts = burn_in_shift_sigmas(
            &params,
            &Unraveling::Qsd,
            &protocol,
            5,
            &InitialState::Density(DensityMatrix::fully_mixed(2)),
            &[Observable::SzFirst],
        )
        .unwrap();
        for (_, sigmas) in shifts {
            // exactly stationary start: the shift is zero to machine precision
            assert!(sigmas.abs() <= 1e-6, "burn-in shift {sigmas}");
        }
    }

    #[test]
    fn mismatched_initial_state_is_rejected() {
        let params = ModelParams::new(3, 0.2, 0.2, 1.0).unwrap();
        let bad = InitialState::Pure(PureState::neel(2));
        assert!(run_trajectory(
            &params,
            &Unraveling::Qsd,
            &short_protocol(1),
            1,
            &bad,
            &[Observable::SzFirst],
        )
        .is_err());
    }

    #[test]
    fn density_initial_state_forces_density_path() {
        // η = 1 but a mixed initial state: the runner must fall back to the
        // density representation and still succeed.
        let params = ModelParams::new(2, 0.3, 0.3, 1.0).unwrap().with_dt(0.005).unwrap();
        let rec = run_trajectory(
            &params,
            &Unraveling::Qsd,
            &short_protocol(1),
            9,
            &InitialState::Density(DensityMatrix::fully_mixed(2)),
            &[Observable::PurityHalf],
        )
        .unwrap();
        assert_eq!(rec.samples[0].len(), 5);
    }

    #[test]
    fn eta_zero_ensemble_relaxes_to_fully_mixed() {
        // Lindblad limit with the record discarded: the field noise ξ still
        // randomizes individual trajectories, but each one contracts onto
        // I/4, so concurrence and half-chain parity variance vanish.
        let params = ModelParams::new(2, 0.5, 0.5, 0.0).unwrap().with_dt(0.01).unwrap();
        let protocol = SamplingProtocol {
            t_burn: 16.0,
            t_window: 2.0,
            sample_interval: 1.0,
            n_traj: 4,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let obs = [Observable::Concurrence, Observable::ParityHalf];
        let stats =
            steady_state_average(&params, &Unraveling::Qsd, &protocol, 77, &obs).unwrap();
        assert!(stats[0].mean <= 0.01, "C̄ = {}", stats[0].mean);
        assert!(stats[1].mean <= 0.02, "P̄ = {}", stats[1].mean);
        let mean = mean_density_matrix(&params, &Unraveling::Qsd, 4, 16.0, 77).unwrap();
        let mixed = DensityMatrix::fully_mixed(2);
        assert!(crate::state::trace_distance(&mean, &mixed).unwrap() < 3e-3);
    }

    #[test]
    fn positivity_incident_accounting() {
        // Exactly diagonal evolution (no field noise, no hopping) can never
        // leave the positive cone, so the audit stays quiet.
        let clean_params = ModelParams::new(2, 0.0, 0.0, 1.0)
            .unwrap()
            .with_hamiltonian(false)
            .with_dt(0.01)
            .unwrap();
        let jp = JumpParams::new(2.0, 1.0).unwrap();
        let clean = run_trajectory(
            &clean_params,
            &Unraveling::Jump(jp),
            &short_protocol(1),
            41,
            &InitialState::Neel,
            &[Observable::SzFirst],
        )
        .unwrap();
        assert_eq!(clean.positivity_incidents, 0);

        // A near-pure density trajectory accumulates spectral dust each step
        // (η = 0.9 keeps the state close to the cone boundary); with the clip
        // threshold at machine level the audits fire, which pins down that
        // the counter is plumbed through.
        let mut dusty_params =
            ModelParams::new(2, 0.4, 1.0, 0.9).unwrap().with_dt(0.01).unwrap();
        dusty_params.positivity_tol = 1e-14;
        let dusty_protocol = SamplingProtocol {
            t_burn: 0.05,
            t_window: 0.25,
            sample_interval: 0.05,
            n_traj: 1,
            mode: AveragingMode::TimeAndTrajectory,
        };
        let dusty = run_trajectory(
            &dusty_params,
            &Unraveling::Qsd,
            &dusty_protocol,
            42,
            &InitialState::Neel,
            &[Observable::SzFirst],
        )
        .unwrap();
        assert!(dusty.positivity_incidents > 0);
    }
}
