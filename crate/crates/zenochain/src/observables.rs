//! Entanglement monotones and operator correlations for single trajectory
//! states: two-qubit concurrence, logarithmic negativity, subsystem parity
//! variance and subsystem purity, with fast pure-state paths where available.

use crate::error::{Error, Result};
use crate::hilbert::{self, half_region, parity_diag, partial_trace, partial_transpose, Axis};
use crate::linalg;
use crate::state::{DensityMatrix, PureState};
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Concurrence of a two-qubit state together with the spectrum it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceResult {
    /// max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄) ∈ [0, 1].
    pub value: f64,
    /// Eigenvalues of ρρ̃ in descending order, clipped into the positive cone.
    pub spectrum: [f64; 4],
}

/// Spin-flipped state ρ̃ = (σ^y⊗σ^y) ρ* (σ^y⊗σ^y).
fn spin_flip(rho: &DMatrix<C64>) -> DMatrix<C64> {
    let y1 = hilbert::pauli_site(Axis::Y, 1, 2).expect("two-qubit Pauli");
    let y2 = hilbert::pauli_site(Axis::Y, 2, 2).expect("two-qubit Pauli");
    let yy = &y1 * &y2;
    let conj = rho.map(|c| c.conj());
    &yy * conj * &yy
}

/// Two-qubit concurrence.
///
/// The spectrum of ρρ̃ is obtained through the Hermitian positive product
/// √ρ ρ̃ √ρ, which shares it exactly (AB and BA have equal spectra), avoiding a
/// non-Hermitian eigensolve.  Eigenvalues inside the noise window |λ| < 1e−10
/// are snapped to zero before the square roots: they are non-negative
/// analytically, and spectral dust of order ε would otherwise surface as √ε in
/// the value (a rank-one projector's three exact zeros carry ~1e−16 noise,
/// which must not contribute 1e−8 each).
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    if rho.sites() != 2 {
        return Err(Error::NotTwoQubits(rho.sites()));
    }
    let sqrt_rho = linalg::psd_sqrt(&rho.matrix);
    let flipped = spin_flip(&rho.matrix);
    let product = &sqrt_rho * flipped * &sqrt_rho;
    let mut vals = linalg::hermitian_eigenvalues(&product);
    vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let mut spectrum = [0.0f64; 4];
    for (i, &v) in vals.iter().take(4).enumerate() {
        if v < -1e-10 {
            return Err(Error::NonFinite {
                context: "concurrence spectrum (eigenvalue below clip threshold)",
            });
        }
        spectrum[i] = if v < 1e-10 { 0.0 } else { v };
    }
    let roots: Vec<f64> = spectrum.iter().map(|&v| v.sqrt()).collect();
    let value = (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0);
    Ok(ConcurrenceResult { value, spectrum })
}

/// Square of the two-qubit concurrence (averaged form used by the jump runs).
pub fn concurrence_squared(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence(rho)?.value.powi(2))
}

/// Concurrence of a two-qubit pure state |ψ⟩ = α|00⟩+β|01⟩+γ|10⟩+δ|11⟩,
/// C = 2|αδ − βγ|.  Agrees with [`concurrence`] of the projector.
pub fn two_qubit_pure_concurrence(psi: &PureState) -> Result<f64> {
    if psi.sites() != 2 {
        return Err(Error::NotTwoQubits(psi.sites()));
    }
    let v = &psi.vector;
    Ok(2.0 * (v[0] * v[3] - v[1] * v[2]).norm())
}

/// Logarithm convention for the negativity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// Logarithmic negativity ε = log ‖ρ^{T_A}‖₁ over `region` (natural log).
pub fn log_negativity(rho: &DensityMatrix, region: &[usize]) -> Result<f64> {
    log_negativity_with_base(rho, region, LogBase::Natural)
}

/// Logarithmic negativity with an explicit logarithm base.
pub fn log_negativity_with_base(
    rho: &DensityMatrix,
    region: &[usize],
    base: LogBase,
) -> Result<f64> {
    let pt = partial_transpose(&rho.matrix, rho.sites(), region)?;
    let trace_norm = linalg::trace_norm_hermitian(&pt);
    Ok(base.log(trace_norm).max(0.0))
}

/// Pure-state shortcut: ‖ρ^{T_A}‖₁ = (Σ_k s_k)² with s_k the Schmidt
/// coefficients, read off the reduced density matrix of `region`.
pub fn pure_log_negativity(psi: &PureState, region: &[usize]) -> Result<f64> {
    pure_log_negativity_with_base(psi, region, LogBase::Natural)
}

pub fn pure_log_negativity_with_base(
    psi: &PureState,
    region: &[usize],
    base: LogBase,
) -> Result<f64> {
    let mask = hilbert::region_mask(region, psi.sites())?;
    if mask == psi.dim() - 1 {
        return Err(Error::InvalidRegion(
            "negativity region must be a proper subset".into(),
        ));
    }
    let reduced = hilbert::reduced_from_vector(&psi.vector, psi.sites(), region)?;
    let schmidt_sum: f64 = linalg::hermitian_eigenvalues(&reduced)
        .iter()
        .map(|&p| p.max(0.0).sqrt())
        .sum();
    Ok(base.log(schmidt_sum * schmidt_sum).max(0.0))
}

/// Subsystem parity variance P = ⟨Π_{j∈sites} σ_j^z⟩², a per-trajectory
/// quantity squared *before* any ensemble averaging.
pub fn subsystem_parity_variance(rho: &DensityMatrix, sites: &[usize]) -> Result<f64> {
    let diag = parity_diag(sites, rho.sites())?;
    let mean: f64 = diag
        .iter()
        .enumerate()
        .map(|(a, &s)| s * rho.matrix[(a, a)].re)
        .sum();
    Ok((mean * mean).min(1.0))
}

/// Pure-state path for the parity variance.
pub fn pure_subsystem_parity_variance(psi: &PureState, sites: &[usize]) -> Result<f64> {
    let diag = parity_diag(sites, psi.sites())?;
    let mean: f64 = diag
        .iter()
        .enumerate()
        .map(|(a, &s)| s * psi.vector[a].norm_sqr())
        .sum();
    Ok((mean * mean).min(1.0))
}

/// Purity Tr[ρ_A²] of the reduced state on `sites` (proper non-empty subset).
pub fn subsystem_purity(rho: &DensityMatrix, sites: &[usize]) -> Result<f64> {
    let mask = hilbert::region_mask(sites, rho.sites())?;
    if mask == rho.dim() - 1 {
        return Err(Error::InvalidRegion(
            "subsystem purity needs a proper subset".into(),
        ));
    }
    let reduced = partial_trace(&rho.matrix, rho.sites(), sites)?;
    Ok(reduced.iter().map(|c| c.norm_sqr()).sum())
}

/// Pure-state path for the subsystem purity.
pub fn pure_subsystem_purity(psi: &PureState, sites: &[usize]) -> Result<f64> {
    let mask = hilbert::region_mask(sites, psi.sites())?;
    if mask == psi.dim() - 1 {
        return Err(Error::InvalidRegion(
            "subsystem purity needs a proper subset".into(),
        ));
    }
    let reduced = hilbert::reduced_from_vector(&psi.vector, psi.sites(), sites)?;
    Ok(reduced.iter().map(|c| c.norm_sqr()).sum())
}

/// Named observables available to trajectory sampling and sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Two-qubit concurrence of the full state (L = 2 only).
    Concurrence,
    /// Square of the concurrence (L = 2 only).
    ConcurrenceSq,
    /// Half-chain logarithmic negativity ε̄_{1/2} (sites 1..L/2, natural log).
    NegHalf,
    /// Half-chain parity variance P̄_{1/2}.
    ParityHalf,
    /// Single-site parity variance P̄₁ = ⟨σ_1^z⟩².
    ParityFirst,
    /// Purity of the reduced half-chain state.
    PurityHalf,
    /// Plain magnetization ⟨σ_1^z⟩ (linear observable, for unraveling checks).
    SzFirst,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Concurrence,
        Observable::ConcurrenceSq,
        Observable::NegHalf,
        Observable::ParityHalf,
        Observable::ParityFirst,
        Observable::PurityHalf,
        Observable::SzFirst,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Concurrence => "concurrence",
            Observable::ConcurrenceSq => "concurrence_sq",
            Observable::NegHalf => "neg_half",
            Observable::ParityHalf => "parity_half",
            Observable::ParityFirst => "parity_1",
            Observable::PurityHalf => "purity_half",
            Observable::SzFirst => "sz_1",
        }
    }

    /// Check the observable makes sense for a chain of `sites` sites.
    pub fn validate_for(&self, sites: usize) -> Result<()> {
        match self {
            Observable::Concurrence | Observable::ConcurrenceSq => {
                if sites != 2 {
                    return Err(Error::NotTwoQubits(sites));
                }
            }
            Observable::NegHalf | Observable::ParityHalf | Observable::PurityHalf => {
                if sites < 2 || sites % 2 != 0 {
                    return Err(Error::Config(format!(
                        "half-chain observable {} needs even L >= 2, got L = {sites}",
                        self.name()
                    )));
                }
            }
            Observable::ParityFirst | Observable::SzFirst => {}
        }
        Ok(())
    }

    /// Evaluate on a density-matrix state.
    pub fn evaluate_density(&self, rho: &DensityMatrix) -> Result<f64> {
        self.validate_for(rho.sites())?;
        match self {
            Observable::Concurrence => Ok(concurrence(rho)?.value),
            Observable::ConcurrenceSq => concurrence_squared(rho),
            Observable::NegHalf => log_negativity(rho, &half_region(rho.sites())),
            Observable::ParityHalf => {
                subsystem_parity_variance(rho, &half_region(rho.sites()))
            }
            Observable::ParityFirst => subsystem_parity_variance(rho, &[1]),
            Observable::PurityHalf => subsystem_purity(rho, &half_region(rho.sites())),
            Observable::SzFirst => {
                let mask = hilbert::site_mask(1, rho.sites());
                Ok((0..rho.dim())
                    .map(|a| hilbert::z_sign(a, mask) * rho.matrix[(a, a)].re)
                    .sum())
            }
        }
    }

    /// Evaluate on a pure state without building the full projector.
    pub fn evaluate_pure(&self, psi: &PureState) -> Result<f64> {
        self.validate_for(psi.sites())?;
        match self {
            Observable::Concurrence => two_qubit_pure_concurrence(psi),
            Observable::ConcurrenceSq => Ok(two_qubit_pure_concurrence(psi)?.powi(2)),
            Observable::NegHalf => pure_log_negativity(psi, &half_region(psi.sites())),
            Observable::ParityHalf => {
                pure_subsystem_parity_variance(psi, &half_region(psi.sites()))
            }
            Observable::ParityFirst => pure_subsystem_parity_variance(psi, &[1]),
            Observable::PurityHalf => pure_subsystem_purity(psi, &half_region(psi.sites())),
            Observable::SzFirst => {
                let mask = hilbert::site_mask(1, psi.sites());
                Ok((0..psi.dim())
                    .map(|a| hilbert::z_sign(a, mask) * psi.vector[a].norm_sqr())
                    .sum())
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .iter()
            .copied()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown observable {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::dim;
    use crate::state::PureState;
    use crate::testutil::{random_density, random_pure, random_real_pure, TestRng};
    use crate::ZERO;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn bell_psi_plus() -> DensityMatrix {
        // (|01⟩ + |10⟩)/√2
        let v = DVector::from_vec(vec![
            ZERO,
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ZERO,
        ]);
        PureState::from_vector(2, v).unwrap().projector()
    }

    fn werner(p: f64) -> DensityMatrix {
        let bell = bell_psi_plus();
        let mut m = bell.matrix * C64::new(p, 0.0);
        for i in 0..4 {
            m[(i, i)] += C64::new((1.0 - p) / 4.0, 0.0);
        }
        DensityMatrix::from_matrix(2, m).unwrap()
    }

    fn random_local_unitary(seed: u64) -> DMatrix<C64> {
        // exp(−iA) ⊗ exp(−iB) from random Hermitian 2×2 generators
        let mut rng = TestRng::new(seed);
        let mut herm = |_: usize| -> DMatrix<C64> {
            let a = rng.next_f64();
            let d = rng.next_f64();
            let re = rng.next_f64();
            let im = rng.next_f64();
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(a, 0.0),
                    C64::new(re, im),
                    C64::new(re, -im),
                    C64::new(d, 0.0),
                ],
            )
        };
        let u1 = crate::linalg::expm(&(herm(0) * C64::new(0.0, -1.0)));
        let u2 = crate::linalg::expm(&(herm(1) * C64::new(0.0, -1.0)));
        let mut u = DMatrix::<C64>::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        u[(2 * a + c, 2 * b + d)] = u1[(a, b)] * u2[(c, d)];
                    }
                }
            }
        }
        u
    }

    #[test]
    fn concurrence_of_bell_state_is_one() {
        let r = concurrence(&bell_psi_plus()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.spectrum[0], 1.0, epsilon = 1e-12);
        assert!(r.spectrum[1..].iter().all(|&v| v < 1e-12));
    }

    #[test]
    fn concurrence_of_product_state_is_zero() {
        let rho = DensityMatrix::basis(2, 0b01).unwrap();
        assert_abs_diff_eq!(concurrence(&rho).unwrap().value, 0.0, epsilon = 1e-12);
        // generic product state (|0⟩+|1⟩)/√2 ⊗ |1⟩
        let v = DVector::from_vec(vec![
            ZERO,
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ZERO,
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let rho = PureState::from_vector(2, v).unwrap().projector();
        assert!(concurrence(&rho).unwrap().value < 1e-12);
    }

    #[test]
    fn werner_concurrence_matches_closed_form() {
        // For p·|Ψ⁺⟩⟨Ψ⁺| + (1−p)I/4: ρ̃ = ρ, the spectrum of ρρ̃ is
        // {((1+3p)/4)², 3 × ((1−p)/4)²} and C = (3p−1)/2 for p > 1/3.
        let p = 0.8;
        let r = concurrence(&werner(p)).unwrap();
        assert_abs_diff_eq!(r.value, (3.0 * p - 1.0) / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.spectrum[0], ((1.0 + 3.0 * p) / 4.0).powi(2), epsilon = 1e-10);
        for k in 1..4 {
            assert_abs_diff_eq!(r.spectrum[k], ((1.0 - p) / 4.0).powi(2), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            concurrence_squared(&werner(p)).unwrap(),
            (0.7f64).powi(2),
            epsilon = 1e-10
        );
    }

    #[test]
    fn werner_below_threshold_clamps_to_zero() {
        for p in [0.0, 0.2, 1.0 / 3.0] {
            assert_eq!(concurrence(&werner(p)).unwrap().value, 0.0);
        }
    }

    #[test]
    fn concurrence_requires_two_qubits() {
        let rho = DensityMatrix::fully_mixed(3);
        assert!(matches!(concurrence(&rho), Err(Error::NotTwoQubits(3))));
    }

    #[test]
    fn concurrence_invariant_under_local_unitaries() {
        for seed in 0..5u64 {
            let rho = DensityMatrix::from_matrix(2, random_density(2, 60 + seed)).unwrap();
            let u = random_local_unitary(seed);
            let rotated =
                DensityMatrix::from_matrix(2, &u * &rho.matrix * u.adjoint()).unwrap();
            let c0 = concurrence(&rho).unwrap().value;
            let c1 = concurrence(&rotated).unwrap().value;
            assert_abs_diff_eq!(c0, c1, epsilon = 1e-8);
        }
    }

    #[test]
    fn pure_formula_matches_spectral_concurrence() {
        for seed in 0..6u64 {
            let v = if seed % 2 == 0 {
                random_real_pure(2, 80 + seed)
            } else {
                random_pure(2, 80 + seed)
            };
            let psi = PureState::from_vector(2, v).unwrap();
            let direct = two_qubit_pure_concurrence(&psi).unwrap();
            let spectral = concurrence(&psi.projector()).unwrap().value;
            assert_abs_diff_eq!(direct, spectral, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_negativity_of_bell_pair_is_ln_two() {
        let rho = bell_psi_plus();
        assert_abs_diff_eq!(
            log_negativity(&rho, &[1]).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            log_negativity_with_base(&rho, &[1], LogBase::Two).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn log_negativity_of_product_state_is_zero() {
        let rho = DensityMatrix::basis(4, 0b0101).unwrap();
        assert_eq!(log_negativity(&rho, &[1, 2]).unwrap(), 0.0);
        let psi = PureState::basis(4, 0b0101).unwrap();
        assert_eq!(pure_log_negativity(&psi, &[1, 2]).unwrap(), 0.0);
    }

    #[test]
    fn pure_schmidt_path_matches_partial_transpose() {
        for seed in 0..4u64 {
            let psi = PureState::from_vector(4, random_pure(4, 30 + seed)).unwrap();
            let rho = psi.projector();
            for region in [vec![1usize], vec![1, 2], vec![2, 4]] {
                let dense = log_negativity(&rho, &region).unwrap();
                let schmidt = pure_log_negativity(&psi, &region).unwrap();
                assert_abs_diff_eq!(dense, schmidt, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn pure_negativity_symmetric_under_complement() {
        let psi = PureState::from_vector(4, random_pure(4, 90)).unwrap();
        let rho = psi.projector();
        let a = log_negativity(&rho, &[1]).unwrap();
        let b = log_negativity(&rho, &[2, 3, 4]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        let c = log_negativity(&rho, &[1, 3]).unwrap();
        let d = log_negativity(&rho, &[2, 4]).unwrap();
        assert_abs_diff_eq!(c, d, epsilon = 1e-8);
    }

    #[test]
    fn negativity_rejects_bad_regions() {
        let rho = DensityMatrix::fully_mixed(2);
        assert!(log_negativity(&rho, &[]).is_err());
        assert!(log_negativity(&rho, &[1, 2]).is_err());
        assert!(log_negativity(&rho, &[5]).is_err());
        let psi = PureState::neel(2);
        assert!(pure_log_negativity(&psi, &[1, 2]).is_err());
    }

    #[test]
    fn parity_variance_examples() {
        let polarized = DensityMatrix::basis(2, 0b01).unwrap();
        assert_abs_diff_eq!(
            subsystem_parity_variance(&polarized, &[1]).unwrap(),
            1.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            subsystem_parity_variance(&bell_psi_plus(), &[1]).unwrap(),
            0.0,
            epsilon = 1e-13
        );
        let mixed = DensityMatrix::fully_mixed(3);
        for sites in [vec![1usize], vec![1, 2], vec![1, 2, 3]] {
            assert_abs_diff_eq!(
                subsystem_parity_variance(&mixed, &sites).unwrap(),
                0.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn parity_variance_detects_definite_parity() {
        // (|00⟩+|11⟩)/√2: two-site parity definite (+1 both branches) → 1,
        // single-site parity indefinite → 0.
        let v = DVector::from_vec(vec![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ZERO,
            ZERO,
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        let psi = PureState::from_vector(2, v).unwrap();
        assert_abs_diff_eq!(
            pure_subsystem_parity_variance(&psi, &[1, 2]).unwrap(),
            1.0,
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(
            pure_subsystem_parity_variance(&psi, &[1]).unwrap(),
            0.0,
            epsilon = 1e-13
        );
        // Néel state: every subsystem parity definite
        let neel = DensityMatrix::neel(4);
        assert_abs_diff_eq!(
            subsystem_parity_variance(&neel, &[1, 2]).unwrap(),
            1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn parity_variance_stays_in_unit_interval() {
        for seed in 0..5u64 {
            let rho = DensityMatrix::from_matrix(3, random_density(3, seed)).unwrap();
            for sites in [vec![1usize], vec![2, 3], vec![1, 2, 3]] {
                let p = subsystem_parity_variance(&rho, &sites).unwrap();
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn subsystem_purity_examples() {
        let product = DensityMatrix::basis(4, 0b0101).unwrap();
        assert_abs_diff_eq!(
            subsystem_purity(&product, &half_region(4)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            subsystem_purity(&bell_psi_plus(), &[1]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            subsystem_purity(&DensityMatrix::fully_mixed(2), &[2]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(subsystem_purity(&product, &[1, 2, 3, 4]).is_err());
    }

    #[test]
    fn observable_enum_round_trips_and_validates() {
        for obs in Observable::ALL {
            let parsed: Observable = obs.name().parse().unwrap();
            assert_eq!(parsed, obs);
        }
        assert!("bogus".parse::<Observable>().is_err());
        assert!(Observable::Concurrence.validate_for(4).is_err());
        assert!(Observable::NegHalf.validate_for(3).is_err());
        assert!(Observable::NegHalf.validate_for(4).is_ok());
        assert!(Observable::SzFirst.validate_for(3).is_ok());
    }

    #[test]
    fn pure_and_density_evaluation_agree() {
        let psi = PureState::from_vector(4, random_pure(4, 123)).unwrap();
        let rho = psi.projector();
        for obs in [
            Observable::NegHalf,
            Observable::ParityHalf,
            Observable::ParityFirst,
            Observable::PurityHalf,
            Observable::SzFirst,
        ] {
            let a = obs.evaluate_pure(&psi).unwrap();
            let b = obs.evaluate_density(&rho).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        let psi2 = PureState::from_vector(2, random_pure(2, 124)).unwrap();
        let rho2 = psi2.projector();
        for obs in [Observable::Concurrence, Observable::ConcurrenceSq] {
            let a = obs.evaluate_pure(&psi2).unwrap();
            let b = obs.evaluate_density(&rho2).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn neel_site_magnetization() {
        let rho = DensityMatrix::neel(4);
        assert_abs_diff_eq!(
            Observable::SzFirst.evaluate_density(&rho).unwrap(),
            -1.0,
            epsilon = 1e-14
        );
        assert_eq!(dim(4), 16);
    }
}
