//! Seeded random instances: unit vectors, Haar unitaries, Hermitian matrices with prescribed spectra.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::HermitianMatrix;
use crate::matrix::{self, CMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    loop {
        let mut x: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if matrix::norm(&x) > 1e-8 {
            matrix::normalize(&mut x);
            return x;
        }
    }
}

/// Haar-distributed unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &cols {
                let proj = matrix::inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        if matrix::norm(&v) > 1e-6 {
            matrix::normalize(&mut v);
            cols.push(v);
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `Q diag(eigs) Q*` with Haar `Q`.
pub fn hermitian_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigs: &[f64]) -> HermitianMatrix {
    let q = random_unitary(rng, eigs.len());
    HermitianMatrix::from_eigensystem(eigs, &q)
}

/// Hermitian matrix with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn random_hermitian_in<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> HermitianMatrix {
    let eigs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..=hi)).collect();
    hermitian_with_spectrum(rng, &eigs)
}

/// `G G*` for a complex Gaussian `G` of random rank, normalized to unit spectral scale.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let rank = rng.random_range(1..=n);
    let g = CMatrix::from_fn(n, rank, |_, _| complex_gaussian(rng));
    let p = g.matmul(&g.adjoint()).expect("shapes agree");
    let scale = p.frobenius_norm().max(1e-300);
    HermitianMatrix::from_matrix_unchecked(p.scale(1.0 / scale))
}
