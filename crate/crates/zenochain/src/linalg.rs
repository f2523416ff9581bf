//! Small dense linear-algebra helpers on top of nalgebra: Hermitian
//! eigensolves, PSD square roots, trace norms and a Padé scaling-and-squaring
//! matrix exponential (used by the Lindblad superoperator oracle).

use crate::C64;
use nalgebra::DMatrix;

/// Eigenvalues of a Hermitian matrix (unsorted input, unsorted output order
/// from the solver; returned as-is — callers sort as needed).
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.as_slice().to_vec()
}

/// Full Hermitian eigendecomposition: (eigenvalues, column eigenvectors).
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let se = m.clone().symmetric_eigen();
    (se.eigenvalues.as_slice().to_vec(), se.eigenvectors)
}

/// Rebuild Σ_k f(e_k) v_k v_k† from a Hermitian eigendecomposition.
pub fn hermitian_function(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let (evs, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, &e) in evs.iter().enumerate() {
        let fv = f(e);
        if fv == 0.0 {
            continue;
        }
        let v = vecs.column(k);
        for c in 0..n {
            let wc = v[c].conj() * fv;
            for r in 0..n {
                out[(r, c)] += v[r] * wc;
            }
        }
    }
    out
}

/// Square root of a positive-semidefinite Hermitian matrix; small negative
/// eigenvalues from float noise are clipped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    hermitian_function(m, |e| if e > 0.0 { e.sqrt() } else { 0.0 })
}

/// Trace norm Σ|e_k| of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum()
}

/// Frobenius distance ‖a − b‖_F.
pub fn frobenius_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Max elementwise modulus difference.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Matrix 1-norm (max absolute column sum), used to pick the expm scaling.
fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential via Padé(13) scaling and squaring.
///
/// Accuracy target is well below the 1e−10 tolerances of the oracle tests for
/// the superoperator sizes used here (≤ 256).
pub fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm needs a square matrix");
    let theta13 = 5.371920351148152; // Higham's Padé(13) threshold
    let norm = one_norm(m);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = m.scale(0.5f64.powi(s));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6.scale(B[13]) + &a4.scale(B[11]) + &a2.scale(B[9]);
    let u_poly = &a6 * &u_inner + &a6.scale(B[7]) + &a4.scale(B[5]) + &a2.scale(B[3]) + &id.scale(B[1]);
    let u = &a * &u_poly;
    let v_inner = &a6.scale(B[12]) + &a4.scale(B[10]) + &a2.scale(B[8]);
    let v = &a6 * &v_inner + &a6.scale(B[6]) + &a4.scale(B[4]) + &a2.scale(B[2]) + &id.scale(B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs
        .lu()
        .solve(&rhs)
        .expect("expm Padé solve failed (singular V - U)");
    for _ in 0..s {
        f = &f * &f;
    }
    f
}
