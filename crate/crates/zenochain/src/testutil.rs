//! Deterministic fixtures shared by unit tests.

use crate::hilbert::dim;
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// xorshift-based uniform in (−0.5, 0.5), deterministic per seed.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1))
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

/// Random full-rank density matrix (Ginibre G G† normalized).
pub fn random_density(l: usize, seed: u64) -> DMatrix<C64> {
    let n = dim(l);
    let mut rng = TestRng::new(seed);
    let g = DMatrix::from_fn(n, n, |_, _| C64::new(rng.next_f64(), rng.next_f64()));
    let mut rho = &g * g.adjoint();
    let tr: C64 = rho.diagonal().iter().sum();
    rho /= tr;
    rho
}

/// Random normalized complex pure state.
pub fn random_pure(l: usize, seed: u64) -> DVector<C64> {
    let n = dim(l);
    let mut rng = TestRng::new(seed);
    let mut v = DVector::from_fn(n, |_, _| C64::new(rng.next_f64(), rng.next_f64()));
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v /= C64::new(nrm, 0.0);
    v
}

/// Random normalized real-amplitude pure state.
pub fn random_real_pure(l: usize, seed: u64) -> DVector<C64> {
    let n = dim(l);
    let mut rng = TestRng::new(seed);
    let mut v = DVector::from_fn(n, |_, _| C64::new(rng.next_f64(), 0.0));
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v /= C64::new(nrm, 0.0);
    v
}
