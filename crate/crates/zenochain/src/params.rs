//! Physical and numerical parameters for one simulation point.

use crate::error::{Error, Result};
pub use crate::hilbert::Boundary as BoundaryCondition;
use serde::{Deserialize, Serialize};

/// Default positivity tolerance for density-matrix hygiene.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-8;

/// Step rule used across all simulations: dt = min(0.05, 0.05/λ, 0.05/Γ),
/// with a strength entering only when it is positive.
pub fn default_dt(gamma: f64, lambda: f64) -> f64 {
    let mut dt = 0.05f64;
    if lambda > 0.0 {
        dt = dt.min(0.05 / lambda);
    }
    if gamma > 0.0 {
        dt = dt.min(0.05 / gamma);
    }
    dt
}

/// Parameters of one physical point of the monitored chain.
///
/// `gamma` is the white-noise strength Γ, `lambda` the measurement strength λ,
/// `eta` the detector efficiency η ∈ [0, 1]. `hamiltonian_on` is a test switch
/// for runs without the hopping term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sites: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub eta: f64,
    pub dt: f64,
    pub hamiltonian_on: bool,
    pub boundary: BoundaryCondition,
    pub positivity_tol: f64,
}

impl ModelParams {
    /// Point with the default step rule, open boundary, Hamiltonian on.
    pub fn new(sites: usize, gamma: f64, lambda: f64, eta: f64) -> Result<Self> {
        let p = ModelParams {
            sites,
            gamma,
            lambda,
            eta,
            dt: default_dt(gamma, lambda),
            hamiltonian_on: true,
            boundary: BoundaryCondition::Open,
            positivity_tol: DEFAULT_POSITIVITY_TOL,
        };
        p.validate()?;
        Ok(p)
    }

    /// Override the time step (convergence studies).
    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_hamiltonian(mut self, on: bool) -> Self {
        self.hamiltonian_on = on;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryCondition) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::InvalidParameter("L must be >= 1".into()));
        }
        if self.sites > 1 && self.hamiltonian_on {
            // bond construction re-checks, but fail early for clarity
            crate::hilbert::bonds(self.sites, self.boundary)?;
        }
        for (name, v) in [("Gamma", self.gamma), ("lambda", self.lambda)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.eta.is_finite() || !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in [0, 1], got {}",
                self.eta
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !self.positivity_tol.is_finite() || self.positivity_tol < 0.0 {
            return Err(Error::InvalidParameter("positivity_tol must be >= 0".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        crate::hilbert::dim(self.sites)
    }
}

/// Quantum-jump unraveling parameters: jump rate γ (via ε = γ·dt) and readout
/// fidelity Δ ∈ (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpParams {
    pub gamma_jump: f64,
    pub delta: f64,
}

impl JumpParams {
    pub fn new(gamma_jump: f64, delta: f64) -> Result<Self> {
        if !gamma_jump.is_finite() || gamma_jump < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma_jump must be >= 0, got {gamma_jump}"
            )));
        }
        if !delta.is_finite() || !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(JumpParams { gamma_jump, delta })
    }

    /// Δ from the detector efficiency via η = |2Δ−1|², taking the Δ > 1/2 branch.
    pub fn delta_from_eta(eta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
        }
        Ok(0.5 * (1.0 + eta.sqrt()))
    }

    /// Per-step jump probability scale ε = γ·dt; must stay ≤ 0.05.
    pub fn epsilon(&self, dt: f64) -> Result<f64> {
        let eps = self.gamma_jump * dt;
        if eps > 0.05 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "epsilon = gamma_jump*dt = {eps:.4} exceeds 0.05; reduce dt"
            )));
        }
        Ok(eps)
    }
}
