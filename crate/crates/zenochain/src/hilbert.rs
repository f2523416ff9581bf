//! Dense Hilbert-space primitives for the spin-1/2 chain.
//!
//! Basis convention (fixed across the crate): basis index `a` encodes the chain
//! configuration with site 1 as the *most significant* bit and bit value 0/1
//! meaning spin-down/up, so `|01⟩` is site 1 down, site 2 up and
//! `σ^z |1⟩ = +|1⟩`. Sites are numbered 1..=L in the public API.

use crate::error::{Error, Result};
use crate::{C64, IM, ONE, ZERO};
use nalgebra::{DMatrix, DVector};

/// Hilbert-space dimension 2^L.
pub fn dim(sites: usize) -> usize {
    1usize << sites
}

/// Bit mask selecting site `j` (1-based, site 1 = most significant bit).
pub fn site_mask(j: usize, sites: usize) -> usize {
    debug_assert!(j >= 1 && j <= sites);
    1usize << (sites - j)
}

/// σ^z sign of basis index `a` at the site selected by `mask`: +1 up, −1 down.
#[inline(always)]
pub fn z_sign(a: usize, mask: usize) -> f64 {
    if a & mask != 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_site(j: usize, sites: usize) -> Result<()> {
    if j == 0 || j > sites {
        return Err(Error::SiteOutOfRange { site: j, sites });
    }
    Ok(())
}

/// Validates a 1-based site set and returns its combined bit mask.
pub fn region_mask(region: &[usize], sites: usize) -> Result<usize> {
    if region.is_empty() {
        return Err(Error::InvalidRegion("empty site set".into()));
    }
    let mut mask = 0usize;
    for &j in region {
        check_site(j, sites)?;
        let m = site_mask(j, sites);
        if mask & m != 0 {
            return Err(Error::InvalidRegion(format!("duplicate site {j}")));
        }
        mask |= m;
    }
    Ok(mask)
}

/// Pauli axis label, including the ladder operators σ^±.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            "+" | "plus" => Ok(Axis::Plus),
            "-" | "minus" => Ok(Axis::Minus),
            other => Err(Error::UnknownAxis(other.into())),
        }
    }
}

/// σ^α at site `j`, embedded as a dense 2^L × 2^L operator
/// (I ⊗ … ⊗ σ^α ⊗ … ⊗ I).
pub fn pauli_site(alpha: Axis, j: usize, sites: usize) -> Result<DMatrix<C64>> {
    check_site(j, sites)?;
    let n = dim(sites);
    let mask = site_mask(j, sites);
    let mut out = DMatrix::<C64>::zeros(n, n);
    for a in 0..n {
        match alpha {
            Axis::X => out[(a ^ mask, a)] = ONE,
            // column a: spin-down goes to −i|up⟩, spin-up to +i|down⟩
            Axis::Y => out[(a ^ mask, a)] = if a & mask == 0 { -IM } else { IM },
            Axis::Z => out[(a, a)] = C64::new(z_sign(a, mask), 0.0),
            Axis::Plus => {
                if a & mask == 0 {
                    out[(a ^ mask, a)] = ONE;
                }
            }
            Axis::Minus => {
                if a & mask != 0 {
                    out[(a ^ mask, a)] = ONE;
                }
            }
        }
    }
    Ok(out)
}

/// Chain boundary condition for the hopping Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Ordered bond list (j, j+1) for the given boundary condition.
pub fn bonds(sites: usize, boundary: Boundary) -> Result<Vec<(usize, usize)>> {
    if sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "hamiltonian requires L >= 2 (got {sites})"
        )));
    }
    let mut list: Vec<(usize, usize)> = (1..sites).map(|j| (j, j + 1)).collect();
    if boundary == Boundary::Periodic {
        if sites == 2 {
            return Err(Error::InvalidParameter(
                "periodic boundary needs L >= 3 (L = 2 would double the single bond)".into(),
            ));
        }
        list.push((sites, 1));
    }
    Ok(list)
}

/// XX hopping Hamiltonian H = Σ_j (i σ_j^+ σ_{j+1}^− + h.c.) with overall
/// energy scale 1. Conserves total σ^z magnetization and total parity.
pub fn build_hamiltonian(sites: usize, boundary: Boundary) -> Result<DMatrix<C64>> {
    let n = dim(sites);
    let mut h = DMatrix::<C64>::zeros(n, n);
    for (j, k) in bonds(sites, boundary)? {
        let mj = site_mask(j, sites);
        let mk = site_mask(k, sites);
        for a in 0..n {
            if a & mj == 0 && a & mk != 0 {
                // i σ_j^+ σ_k^− moves the up-spin from k to j
                h[(a ^ (mj | mk), a)] += IM;
            } else if a & mj != 0 && a & mk == 0 {
                h[(a ^ (mj | mk), a)] -= IM;
            }
        }
    }
    Ok(h)
}

/// Partial trace over the complement of `keep` (1-based sites). The reduced
/// index orders kept sites by site number, most significant first, matching the
/// global convention. `keep` may be the full system (identity case).
pub fn partial_trace(m: &DMatrix<C64>, sites: usize, keep: &[usize]) -> Result<DMatrix<C64>> {
    let keep_mask = region_mask(keep, sites)?;
    let k = keep_mask.count_ones() as usize;
    let t = sites - k;
    let n_keep = 1usize << k;
    let n_tr = 1usize << t;

    // Scatter tables: compact kept/traced indices -> full-index bit patterns.
    let kept_bits: Vec<usize> = (0..sites)
        .map(|b| 1usize << (sites - 1 - b))
        .filter(|bm| keep_mask & bm != 0)
        .collect();
    let traced_bits: Vec<usize> = (0..sites)
        .map(|b| 1usize << (sites - 1 - b))
        .filter(|bm| keep_mask & bm == 0)
        .collect();
    let scatter = |compact: usize, bits: &[usize]| -> usize {
        let mut full = 0usize;
        for (pos, bm) in bits.iter().enumerate() {
            if compact & (1 << (bits.len() - 1 - pos)) != 0 {
                full |= bm;
            }
        }
        full
    };
    let kept_full: Vec<usize> = (0..n_keep).map(|c| scatter(c, &kept_bits)).collect();
    let traced_full: Vec<usize> = (0..n_tr).map(|c| scatter(c, &traced_bits)).collect();

    let mut out = DMatrix::<C64>::zeros(n_keep, n_keep);
    for (ka, &fa) in kept_full.iter().enumerate() {
        for (kb, &fb) in kept_full.iter().enumerate() {
            let mut acc = ZERO;
            for &ft in &traced_full {
                acc += m[(fa | ft, fb | ft)];
            }
            out[(ka, kb)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix of `keep` for a pure state given as an amplitude
/// vector, without materializing the full projector: ρ_A[x,y] = Σ_t ψ(x,t)ψ*(y,t).
/// Index conventions match [`partial_trace`] of the projector exactly.
pub fn reduced_from_vector(psi: &DVector<C64>, sites: usize, keep: &[usize]) -> Result<DMatrix<C64>> {
    if psi.len() != dim(sites) {
        return Err(Error::DimensionMismatch(format!(
            "state vector has length {}, expected {}",
            psi.len(),
            dim(sites)
        )));
    }
    let keep_mask = region_mask(keep, sites)?;
    let k = keep_mask.count_ones() as usize;
    let t = sites - k;
    let n_keep = 1usize << k;
    let n_tr = 1usize << t;
    let kept_bits: Vec<usize> = (0..sites)
        .map(|b| 1usize << (sites - 1 - b))
        .filter(|bm| keep_mask & bm != 0)
        .collect();
    let traced_bits: Vec<usize> = (0..sites)
        .map(|b| 1usize << (sites - 1 - b))
        .filter(|bm| keep_mask & bm == 0)
        .collect();
    let scatter = |compact: usize, bits: &[usize]| -> usize {
        let mut full = 0usize;
        for (pos, bm) in bits.iter().enumerate() {
            if compact & (1 << (bits.len() - 1 - pos)) != 0 {
                full |= bm;
            }
        }
        full
    };
    let kept_full: Vec<usize> = (0..n_keep).map(|c| scatter(c, &kept_bits)).collect();
    let traced_full: Vec<usize> = (0..n_tr).map(|c| scatter(c, &traced_bits)).collect();

    let mut out = DMatrix::<C64>::zeros(n_keep, n_keep);
    let mut column = vec![ZERO; n_keep];
    for &ft in &traced_full {
        for (kx, &fx) in kept_full.iter().enumerate() {
            column[kx] = psi[fx | ft];
        }
        for (kx, &cx) in column.iter().enumerate() {
            for (ky, &cy) in column.iter().enumerate() {
                out[(kx, ky)] += cx * cy.conj();
            }
        }
    }
    Ok(out)
}

/// Partial transpose over `region` (1-based sites, proper non-empty subset).
pub fn partial_transpose(m: &DMatrix<C64>, sites: usize, region: &[usize]) -> Result<DMatrix<C64>> {
    let mask = region_mask(region, sites)?;
    let n = dim(sites);
    if mask == n - 1 {
        return Err(Error::InvalidRegion(
            "partial transpose region must be a proper subset".into(),
        ));
    }
    let rest = (n - 1) ^ mask;
    let mut out = DMatrix::<C64>::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            out[(a, b)] = m[((b & mask) | (a & rest), (a & mask) | (b & rest))];
        }
    }
    Ok(out)
}

/// Diagonal of Π_{j∈sites} σ_j^z as a sign vector over basis indices.
pub fn parity_diag(region: &[usize], sites: usize) -> Result<Vec<f64>> {
    let mask = region_mask(region, sites)?;
    let n = dim(sites);
    Ok((0..n)
        .map(|a| {
            // product of ±1 over the region: −1 per down-spin
            let downs = (!a & mask).count_ones();
            if downs % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect())
}

/// Basis index of the Néel product state |0101…⟩ (site 1 down).
pub fn neel_index(sites: usize) -> usize {
    let mut idx = 0usize;
    for j in 1..=sites {
        if j % 2 == 0 {
            idx |= site_mask(j, sites);
        }
    }
    idx
}

/// 1..L/2 half-chain site list.
pub fn half_region(sites: usize) -> Vec<usize> {
    (1..=sites / 2).collect()
}
