//! Quantum-trajectory simulator for a continuously monitored spin-1/2 XX chain
//! with local white-noise magnetic fields and inefficient (η ≤ 1) homodyne-type
//! measurement of every σ^z.
//!
//! The crate provides:
//! - dense Hilbert-space primitives (Pauli embeddings, the XX Hamiltonian,
//!   partial trace/transpose, density-matrix hygiene) in [`hilbert`] and [`state`];
//! - Euler–Maruyama integrators for the inefficient quantum-state-diffusion
//!   stochastic master equation, its pure-state η = 1 form, the averaged
//!   Lindblad equation, a split-detector variant and a quantum-jump unraveling
//!   with faulty readout, in [`dynamics`];
//! - entanglement and operator-correlation observables (concurrence,
//!   logarithmic negativity, subsystem parity variance, subsystem purity) in
//!   [`observables`];
//! - reproducible seeded trajectory ensembles in [`ensemble`];
//! - independent brute-force verification oracles in [`oracles`];
//! - parameter sweeps, non-monotonicity detection and finite-size critical-point
//!   estimation in [`sweep`], driven by the `zenochain` CLI.
//!
//! Basis convention: bit 0 is spin-down, bit 1 is spin-up, and site 1 is the
//! most significant bit of the basis index, so for two sites `|01⟩` means site 1
//! down, site 2 up.

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod oracles;
pub mod params;
pub mod state;
pub mod sweep;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use nalgebra::DMatrix;
pub use params::{BoundaryCondition, JumpParams, ModelParams};
pub use state::{DensityMatrix, PureState};

use num_complex::Complex;

/// Complex double, the scalar type of every operator and amplitude here.
pub type C64 = Complex<f64>;

/// Imaginary unit.
pub const IM: C64 = Complex::new(0.0, 1.0);

/// Complex one.
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// Complex zero.
pub const ZERO: C64 = Complex::new(0.0, 0.0);
