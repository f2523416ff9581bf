//! State containers: pure states, density matrices, and numerical hygiene.

use crate::error::{Error, Result};
use crate::hilbert::{self, neel_index};
use crate::{C64, ONE, ZERO};
use nalgebra::{DMatrix, DVector};

/// Normalized pure state on `sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub vector: DVector<C64>,
    sites: usize,
}

impl PureState {
    /// Computational basis state |index⟩.
    pub fn basis(sites: usize, index: usize) -> Result<Self> {
        let dim = hilbert::dim(sites);
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {sites} sites"
            )));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(PureState { vector: v, sites })
    }

    /// Néel state |↓↑↓↑…⟩ (site 1 down).
    pub fn neel(sites: usize) -> Self {
        Self::basis(sites, neel_index(sites)).expect("neel index in range")
    }

    /// Wrap an arbitrary vector, normalizing it.
    pub fn from_vector(sites: usize, vector: DVector<C64>) -> Result<Self> {
        if vector.len() != hilbert::dim(sites) {
            return Err(Error::DimensionMismatch(format!(
                "expected dim {} for {sites} sites, got {}",
                hilbert::dim(sites),
                vector.len()
            )));
        }
        let mut s = PureState { vector, sites };
        s.normalize()?;
        Ok(s)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm; errors on collapse or non-finite amplitudes.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() {
            return Err(Error::NonFinite { context: "pure-state norm" });
        }
        if n < 1e-12 {
            return Err(Error::TraceCollapse { trace: n * n });
        }
        let inv = 1.0 / n;
        for c in self.vector.iter_mut() {
            *c *= inv;
        }
        Ok(())
    }

    /// |ψ⟩⟨ψ| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = self.vector[a] * self.vector[b].conj();
            }
        }
        DensityMatrix { matrix: m, sites: self.sites }
    }

    /// ⟨ψ|O|ψ⟩ for a Hermitian operator (real part returned).
    pub fn expectation(&self, op: &DMatrix<C64>) -> f64 {
        let acted = op * &self.vector;
        self.vector.dotc(&acted).re
    }
}

/// Outcome of a positivity audit on a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    /// Most negative eigenvalue found before any repair (0 for a clean state).
    pub min_eigenvalue: f64,
    /// Whether the spectrum had to be clipped back to the positive cone.
    pub clipped: bool,
}

impl PositivityReport {
    pub fn clean() -> Self {
        PositivityReport { min_eigenvalue: 0.0, clipped: false }
    }
}

/// Trace-one Hermitian density matrix on `sites` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<C64>,
    sites: usize,
}

impl DensityMatrix {
    /// Wrap a raw matrix; hermitizes and normalizes but does not audit positivity.
    pub fn from_matrix(sites: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = hilbert::dim(sites);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} for {sites} sites, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut rho = DensityMatrix { matrix, sites };
        rho.hygiene()?;
        Ok(rho)
    }

    pub fn pure(state: &PureState) -> Self {
        state.projector()
    }

    pub fn neel(sites: usize) -> Self {
        PureState::neel(sites).projector()
    }

    pub fn basis(sites: usize, index: usize) -> Result<Self> {
        Ok(PureState::basis(sites, index)?.projector())
    }

    /// Maximally mixed state I / 2^L.
    pub fn fully_mixed(sites: usize) -> Self {
        let dim = hilbert::dim(sites);
        let m = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { matrix: m, sites }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        let mut t = ZERO;
        for i in 0..self.dim() {
            t += self.matrix[(i, i)];
        }
        t
    }

    /// Tr ρ².  Uses Hermiticity: purity = Σ_{ab} |ρ_{ab}|².
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Re Tr(ρ O) for Hermitian O.
    pub fn expectation(&self, op: &DMatrix<C64>) -> f64 {
        let mut acc = ZERO;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                acc += self.matrix[(a, b)] * op[(b, a)];
            }
        }
        acc.re
    }

    /// Cheap per-step hygiene: hermitize, verify finiteness, renormalize trace.
    ///
    /// Used inside integrator loops where an eigendecomposition per step would
    /// dominate the cost; full positivity audits run at sample times only.
    pub(crate) fn hygiene(&mut self) -> Result<()> {
        let d = self.dim();
        for a in 0..d {
            for b in (a + 1)..d {
                let avg = 0.5 * (self.matrix[(a, b)] + self.matrix[(b, a)].conj());
                self.matrix[(a, b)] = avg;
                self.matrix[(b, a)] = avg.conj();
            }
            let diag = self.matrix[(a, a)].re;
            self.matrix[(a, a)] = C64::new(diag, 0.0);
        }
        let tr = self.trace().re;
        if !tr.is_finite() {
            return Err(Error::NonFinite { context: "density-matrix trace" });
        }
        if tr.abs() < 1e-12 {
            return Err(Error::TraceCollapse { trace: tr });
        }
        let inv = 1.0 / tr;
        for c in self.matrix.iter_mut() {
            *c *= inv;
        }
        Ok(())
    }

    /// Full hygiene pass: hermitize, normalize, and audit the spectrum.
    ///
    /// Eigenvalues below `-tol` trigger a clip of the whole negative part and a
    /// renormalization; the report carries the worst offender so callers can
    /// log an incident.  Trace collapse and non-finite entries are errors.
    pub fn hermitize_normalize(&mut self, tol: f64) -> Result<PositivityReport> {
        self.hygiene()?;
        let (vals, vecs) = crate::linalg::hermitian_eigen(&self.matrix);
        let min_eig = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig >= -tol {
            return Ok(PositivityReport { min_eigenvalue: min_eig.min(0.0), clipped: false });
        }
        let clipped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total < 1e-12 {
            return Err(Error::TraceCollapse { trace: total });
        }
        let d = self.dim();
        let mut rebuilt = DMatrix::from_element(d, d, ZERO);
        for (k, &lk) in clipped.iter().enumerate() {
            if lk == 0.0 {
                continue;
            }
            let col = vecs.column(k);
            let w = C64::new(lk / total, 0.0);
            for a in 0..d {
                for b in 0..d {
                    rebuilt[(a, b)] += w * col[a] * col[b].conj();
                }
            }
        }
        self.matrix = rebuilt;
        Ok(PositivityReport { min_eigenvalue: min_eig, clipped: true })
    }
}

/// Trace distance ½‖ρ − σ‖₁ between two density matrices.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance needs equal dims, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = &a.matrix - &b.matrix;
    Ok(0.5 * crate::linalg::trace_norm_hermitian(&diff))
}
