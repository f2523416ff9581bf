//! Euler–Maruyama integrators for the monitored chain.
//!
//! One step of the diffusive map evolves ρ by
//!
//! ```text
//! Δρ = −i[H,ρ] dt − i Σ_j [σ_j^y, ρ] dξ_j − (Γ/2) Σ_j [σ_j^y,[σ_j^y,ρ]] dt
//!      + √η Σ_j {σ_j^z − ⟨σ_j^z⟩, ρ} dW_j − (λ/2) Σ_j [σ_j^z,[σ_j^z,ρ]] dt
//! ```
//!
//! with dξ_j ~ N(0, Γdt) and dW_j ~ N(0, λdt), followed by hermitization and
//! trace normalization.  All Pauli structure is applied through bit kernels in
//! the computational basis — no operator matrices are materialized — so a step
//! costs O(L·4^L).  The pure-state unraveling, the split-detector variant and
//! the jump protocol with faulty readout share the same machinery.

use crate::error::{Error, Result};
use crate::hilbert::{self, site_mask, z_sign};
use crate::params::{JumpParams, ModelParams};
use crate::state::{DensityMatrix, PureState};
use crate::{C64, ZERO};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Per-site noise increments for one step: `xi` drives the fluctuating field
/// (variance Γ·dt), `w` is the measurement record (variance λ·dt).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrements {
    pub xi: Vec<f64>,
    pub w: Vec<f64>,
}

impl NoiseIncrements {
    pub fn zeros(sites: usize) -> Self {
        NoiseIncrements { xi: vec![0.0; sites], w: vec![0.0; sites] }
    }
}

/// Draw one step's increments.  The sampling order is fixed (ξ then W for each
/// site in turn) so a seeded stream reproduces bit-identically.
pub fn sample_increments<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> NoiseIncrements {
    let s_xi = (params.gamma * params.dt).sqrt();
    let s_w = (params.lambda * params.dt).sqrt();
    let mut inc = NoiseIncrements::zeros(params.sites);
    for j in 0..params.sites {
        let gx: f64 = rng.sample(StandardNormal);
        let gw: f64 = rng.sample(StandardNormal);
        inc.xi[j] = s_xi * gx;
        inc.w[j] = s_w * gw;
    }
    inc
}

/// Detector click recorded by one jump-protocol measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    Up,
    Down,
}

/// Precomputed bit tables plus scratch buffers for one chain geometry.
/// Create once per trajectory and reuse; steps borrow it mutably for scratch.
pub struct ChainKernel {
    sites: usize,
    dim: usize,
    masks: Vec<usize>,
    /// Bond mask pairs (m_j, m_k) for the hopping term; empty when L = 1 or
    /// the Hamiltonian is switched off.
    bond_masks: Vec<(usize, usize)>,
    delta: DMatrix<C64>,
    hrho: DMatrix<C64>,
    wtable: Vec<f64>,
    mz: Vec<f64>,
}

impl ChainKernel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let sites = params.sites;
        let dim = hilbert::dim(sites);
        let masks: Vec<usize> = (1..=sites).map(|j| site_mask(j, sites)).collect();
        let bond_masks = if params.hamiltonian_on && sites >= 2 {
            hilbert::bonds(sites, params.boundary)?
                .into_iter()
                .map(|(j, k)| (site_mask(j, sites), site_mask(k, sites)))
                .collect()
        } else {
            Vec::new()
        };
        Ok(ChainKernel {
            sites,
            dim,
            masks,
            bond_masks,
            delta: DMatrix::from_element(dim, dim, ZERO),
            hrho: DMatrix::from_element(dim, dim, ZERO),
            wtable: vec![0.0; dim],
            mz: vec![0.0; sites],
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    fn check(&self, params: &ModelParams, state_dim: usize) -> Result<()> {
        if params.sites != self.sites || state_dim != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "kernel built for L={} (dim {}), called with L={} (dim {})",
                self.sites, self.dim, params.sites, state_dim
            )));
        }
        Ok(())
    }

    /// ⟨σ_j^z⟩ for every site from the diagonal of ρ.
    pub fn z_expectations_density(&self, rho: &DensityMatrix) -> Vec<f64> {
        let m = &rho.matrix;
        self.masks
            .iter()
            .map(|&mask| (0..self.dim).map(|a| z_sign(a, mask) * m[(a, a)].re).sum())
            .collect()
    }

    /// ⟨σ_j^z⟩ for every site from amplitude weights.
    pub fn z_expectations_pure(&self, psi: &PureState) -> Vec<f64> {
        self.masks
            .iter()
            .map(|&mask| {
                (0..self.dim)
                    .map(|a| z_sign(a, mask) * psi.vector[a].norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Accumulate the Euler increment for the density representation into
    /// `self.delta`.  `innovation_scale` multiplies the record term (√η for the
    /// standard map, 1 for the split detector, 0 for unmonitored evolution) and
    /// `dephasing_rate` is the deterministic σ^z double-commutator strength.
    fn density_delta(
        &mut self,
        rho: &DMatrix<C64>,
        params: &ModelParams,
        inc: &NoiseIncrements,
        innovation_scale: f64,
        dephasing_rate: f64,
    ) {
        let dim = self.dim;
        let dt = params.dt;
        self.delta.fill(ZERO);

        // −i [H, ρ] dt, using ρ = ρ† so that ρH = (Hρ)†.
        if !self.bond_masks.is_empty() {
            self.hrho.fill(ZERO);
            for &(mj, mk) in &self.bond_masks {
                let flip = mj | mk;
                for a in 0..dim {
                    let hop = a & flip;
                    if hop == mk {
                        // i σ_j^+ σ_k^− : up spin moves k → j
                        for b in 0..dim {
                            let v = crate::IM * rho[(a, b)];
                            self.hrho[(a ^ flip, b)] += v;
                        }
                    } else if hop == mj {
                        for b in 0..dim {
                            let v = crate::IM * rho[(a, b)];
                            self.hrho[(a ^ flip, b)] -= v;
                        }
                    }
                }
            }
            let cdt = C64::new(0.0, -dt); // −i·dt
            for a in 0..dim {
                for b in 0..dim {
                    let comm = self.hrho[(a, b)] - self.hrho[(b, a)].conj();
                    self.delta[(a, b)] += cdt * comm;
                }
            }
        }

        // Site-local ξ noise: −i[σ_j^y,ρ]dξ_j has the real Hermitian kernel
        //   −z_j(a) ρ_{a⊕m,b} − z_j(b) ρ_{a,b⊕m},
        // and the Γ dissipator −(Γ/2)[σ^y,[σ^y,ρ]]dt contributes
        //   −Γdt (ρ_{ab} − z_j(a)z_j(b) ρ_{a⊕m,b⊕m}).
        let gdt = params.gamma * dt;
        for (j, &mask) in self.masks.iter().enumerate() {
            let dxi = inc.xi[j];
            if dxi == 0.0 && gdt == 0.0 {
                continue;
            }
            for a in 0..dim {
                let za = z_sign(a, mask);
                let af = a ^ mask;
                for b in 0..dim {
                    let zb = z_sign(b, mask);
                    let mut t = ZERO;
                    if dxi != 0.0 {
                        t -= dxi * (za * rho[(af, b)] + zb * rho[(a, b ^ mask)]);
                    }
                    if gdt != 0.0 {
                        t += gdt * (za * zb * rho[(af, b ^ mask)] - rho[(a, b)]);
                    }
                    self.delta[(a, b)] += t;
                }
            }
        }

        // Innovation + deterministic dephasing, both diagonal in bit space:
        //   scale·(w(a)+w(b)−2c)·ρ_{ab} − 2·dephasing_rate·dt·hamming(a⊕b)·ρ_{ab}
        // with w(x) = Σ_j dW_j z_j(x) and c = Σ_j dW_j ⟨σ_j^z⟩.
        let mut c = 0.0;
        if innovation_scale != 0.0 {
            let mz = self.z_expectations_density_raw(rho);
            for x in 0..dim {
                let mut wx = 0.0;
                for (j, &mask) in self.masks.iter().enumerate() {
                    wx += inc.w[j] * z_sign(x, mask);
                }
                self.wtable[x] = wx;
            }
            for (j, &w) in inc.w.iter().enumerate() {
                c += w * mz[j];
            }
        }
        let deph = 2.0 * dephasing_rate * dt;
        for a in 0..dim {
            for b in 0..dim {
                let mut coeff = 0.0;
                if innovation_scale != 0.0 {
                    coeff += innovation_scale * (self.wtable[a] + self.wtable[b] - 2.0 * c);
                }
                if deph != 0.0 {
                    coeff -= deph * ((a ^ b).count_ones() as f64);
                }
                if coeff != 0.0 {
                    self.delta[(a, b)] += coeff * rho[(a, b)];
                }
            }
        }
    }

    fn z_expectations_density_raw(&mut self, rho: &DMatrix<C64>) -> Vec<f64> {
        for (j, &mask) in self.masks.iter().enumerate() {
            self.mz[j] = (0..self.dim).map(|a| z_sign(a, mask) * rho[(a, a)].re).sum();
        }
        self.mz.clone()
    }
}

/// One diffusive step of the monitored density matrix (efficiency η from
/// `params`), followed by hermitization and trace normalization.
pub fn qsd_step(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
) -> Result<()> {
    kernel.check(params, rho.dim())?;
    kernel.density_delta(&rho.matrix, params, inc, params.eta.sqrt(), params.lambda);
    rho.matrix += &kernel.delta;
    rho.hygiene()
}

/// One deterministic step of the unconditional master equation (the η = 0,
/// record-averaged map): identical to [`qsd_step`] with all increments zero.
pub fn lindblad_step(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    kernel: &mut ChainKernel,
) -> Result<()> {
    kernel.check(params, rho.dim())?;
    let inc = NoiseIncrements::zeros(params.sites);
    kernel.density_delta(&rho.matrix, params, &inc, 0.0, params.lambda);
    rho.matrix += &kernel.delta;
    rho.hygiene()
}

/// Split-detector step: a monitored channel of strength λ₁ = `params.lambda`
/// read out at unit efficiency, plus an unmonitored dephasing channel λ₂.
/// With λ₂ = 0 this is exactly the η = 1 diffusive map; with λ₁ = ηλ and
/// λ₂ = (1−η)λ it reproduces the inefficient detector of strength λ.
pub fn split_detector_step(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    lambda2: f64,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
) -> Result<()> {
    if !lambda2.is_finite() || lambda2 < 0.0 {
        return Err(Error::InvalidParameter(format!("lambda2 must be >= 0, got {lambda2}")));
    }
    kernel.check(params, rho.dim())?;
    kernel.density_delta(&rho.matrix, params, inc, 1.0, params.lambda + lambda2);
    rho.matrix += &kernel.delta;
    rho.hygiene()
}

/// One step of the pure-state unraveling (requires η = 1):
///
/// ```text
/// ψ += [−iH dt − i Σ_j σ_j^y dξ_j − (ΓL/2) dt
///       + Σ_j ((σ_j^z − m_j) dW_j − (λ/2)(σ_j^z − m_j)² dt)] ψ
/// ```
///
/// then renormalize.  Every coefficient is real in the computational basis, so
/// real initial amplitudes stay exactly real.
pub fn pure_qsd_step(
    psi: &mut PureState,
    params: &ModelParams,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
) -> Result<()> {
    if params.eta != 1.0 {
        return Err(Error::PureRequiresUnitEfficiency(params.eta));
    }
    kernel.check(params, psi.dim())?;
    let dim = psi.dim();
    let dt = params.dt;
    let mz = kernel.z_expectations_pure(psi);
    let mut delta = vec![0.0f64; dim]; // real coefficient per target, filled below
    // Diagonal part: −(ΓL/2)dt + Σ_j [(z_j − m_j) dW_j − (λ/2)(z_j − m_j)² dt].
    let gamma_shift = -0.5 * params.gamma * params.sites as f64 * dt;
    for (a, d) in delta.iter_mut().enumerate() {
        let mut q = gamma_shift;
        for (j, &mask) in kernel.masks.iter().enumerate() {
            let dz = z_sign(a, mask) - mz[j];
            q += dz * inc.w[j] - 0.5 * params.lambda * dz * dz * dt;
        }
        *d = q;
    }
    let mut out = psi.vector.clone();
    for a in 0..dim {
        out[a] += delta[a] * psi.vector[a];
    }
    // Hopping: (−iH)ψ has entries ±1 connecting a ↔ a⊕(m_j|m_k).
    for &(mj, mk) in &kernel.bond_masks {
        let flip = mj | mk;
        for a in 0..dim {
            let hop = a & flip;
            if hop == mk {
                out[a ^ flip] += dt * psi.vector[a];
            } else if hop == mj {
                out[a ^ flip] -= dt * psi.vector[a];
            }
        }
    }
    // Field noise: (−iσ_j^y ψ)_a = −z_j(a) ψ_{a⊕m_j}.
    for (j, &mask) in kernel.masks.iter().enumerate() {
        let dxi = inc.xi[j];
        if dxi == 0.0 {
            continue;
        }
        for a in 0..dim {
            out[a] -= dxi * z_sign(a, mask) * psi.vector[a ^ mask];
        }
    }
    psi.vector = out;
    psi.normalize()
}

/// One step of the jump protocol: the Hamiltonian/field part of the Euler map
/// (no diffusive measurement terms), then one faulty-detector measurement per
/// site in site order, sampling each readout from its observed distribution.
/// Returns the recorded clicks.
pub fn jump_step<R: Rng + ?Sized>(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    jump: &JumpParams,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
    rng: &mut R,
) -> Result<Vec<Readout>> {
    jump_drift(rho, params, inc, kernel)?;
    let eps = jump.epsilon(params.dt)?;
    let mut clicks = Vec::with_capacity(params.sites);
    for j in 1..=params.sites {
        let mask = site_mask(j, params.sites);
        let p_up_true = true_up_probability(rho, mask, eps);
        let p_up_obs = jump.delta * p_up_true + (1.0 - jump.delta) * (1.0 - p_up_true);
        check_probability(p_up_obs)?;
        let r = if rng.random::<f64>() < p_up_obs { Readout::Up } else { Readout::Down };
        apply_faulty_measurement(rho, mask, eps, jump.delta, r)?;
        clicks.push(r);
    }
    rho.hygiene()?;
    Ok(clicks)
}

/// Deterministic-readout variant of [`jump_step`] for tests and oracles: the
/// caller dictates every click instead of sampling it.
pub fn jump_step_forced(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    jump: &JumpParams,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
    readouts: &[Readout],
) -> Result<()> {
    if readouts.len() != params.sites {
        return Err(Error::DimensionMismatch(format!(
            "need one readout per site ({} sites, got {})",
            params.sites,
            readouts.len()
        )));
    }
    jump_drift(rho, params, inc, kernel)?;
    let eps = jump.epsilon(params.dt)?;
    for (j, &r) in readouts.iter().enumerate() {
        let mask = site_mask(j + 1, params.sites);
        apply_faulty_measurement(rho, mask, eps, jump.delta, r)?;
    }
    rho.hygiene()
}

fn jump_drift(
    rho: &mut DensityMatrix,
    params: &ModelParams,
    inc: &NoiseIncrements,
    kernel: &mut ChainKernel,
) -> Result<()> {
    kernel.check(params, rho.dim())?;
    kernel.density_delta(&rho.matrix, params, inc, 0.0, 0.0);
    rho.matrix += &kernel.delta;
    rho.hygiene()
}

/// Probability of a true up-click at one site: Tr[K_↑ ρ K_↑†] = ε Σ_{a∋site} ρ_aa.
fn true_up_probability(rho: &DensityMatrix, mask: usize, eps: f64) -> f64 {
    let mut pop = 0.0;
    for a in 0..rho.dim() {
        if a & mask != 0 {
            pop += rho.matrix[(a, a)].re;
        }
    }
    eps * pop
}

fn check_probability(p: f64) -> Result<()> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::ProbabilityRange { p });
    }
    Ok(())
}

/// Faulty-readout update ρ → [Δ K_r ρ K_r† + (1−Δ) K_r̄ ρ K_r̄†] / p(r) with
/// K_↑ = √ε |↑⟩⟨↑| and K_↓ = √(1−ε)|↑⟩⟨↑| + |↓⟩⟨↓| on one site.  Both Kraus
/// operators are diagonal here, so the update is an elementwise rescale.
fn apply_faulty_measurement(
    rho: &mut DensityMatrix,
    mask: usize,
    eps: f64,
    delta: f64,
    readout: Readout,
) -> Result<()> {
    let dim = rho.dim();
    let up_amp = eps.sqrt(); // ⟨↑|K_↑|↑⟩
    let down_amp = (1.0 - eps).sqrt(); // ⟨↑|K_↓|↑⟩ (⟨↓|K_↓|↓⟩ = 1)
    // Per-bit amplitudes of the readout-matched and readout-opposite operators.
    let (match_up, match_down, other_up, other_down) = match readout {
        Readout::Up => (up_amp, 0.0, down_amp, 1.0),
        Readout::Down => (down_amp, 1.0, up_amp, 0.0),
    };
    let coeff = |bit_set: bool| -> (f64, f64) {
        if bit_set {
            (match_up, other_up)
        } else {
            (match_down, other_down)
        }
    };
    let mut norm = 0.0;
    for a in 0..dim {
        let (ma, oa) = coeff(a & mask != 0);
        norm += (delta * ma * ma + (1.0 - delta) * oa * oa) * rho.matrix[(a, a)].re;
    }
    check_probability(norm)?;
    if norm < 1e-14 {
        return Err(Error::TraceCollapse { trace: norm });
    }
    let inv = 1.0 / norm;
    for a in 0..dim {
        let (ma, oa) = coeff(a & mask != 0);
        for b in 0..dim {
            let (mb, ob) = coeff(b & mask != 0);
            let w = (delta * ma * mb + (1.0 - delta) * oa * ob) * inv;
            rho.matrix[(a, b)] *= w;
        }
    }
    Ok(())
}
