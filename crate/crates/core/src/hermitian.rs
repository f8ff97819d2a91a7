//! Hermitian matrices: cyclic Jacobi eigensolver, functional calculus and the Loewner order.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::sampling;
use crate::scalarfn::{Interval, ScalarFunction};

/// Tolerance for snapping eigenvalues onto a closed domain endpoint.
pub const SPECTRUM_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

/// Eigenvalues in ascending order and the matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `U diag(g(lambda)) U*`
    pub fn rebuild_with(&self, g: impl Fn(f64) -> f64) -> HermitianMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        HermitianMatrix::from_eigensystem(&mapped, &self.eigenvectors)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.rebuild_with(|l| l)
    }
}

impl HermitianMatrix {
    /// Accepts `m` when `max |m_ij - conj(m_ji)| <= 1e-12 (1 + max |m_ij|)` and stores
    /// the exactly Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::BadDimensions(format!("{}x{} matrix is not square", m.rows(), m.cols())));
        }
        let defect = m.hermitian_defect();
        if defect > 1e-12 * (1.0 + m.max_abs()) {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let n = m.rows();
        let sym = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        });
        Self(sym)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CMatrix::from_parts(rows, None)?)
    }

    pub fn diag(d: &[f64]) -> Self {
        Self(CMatrix::from_real_diag(d))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    /// `U diag(eigs) U*` computed as a sum of rank-one projectors.
    pub fn from_eigensystem(eigs: &[f64], u: &CMatrix) -> Self {
        let n = u.rows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &l) in eigs.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            for i in 0..n {
                let ui = u[(i, k)] * l;
                for j in 0..n {
                    out[(i, j)] += ui * u[(j, k)].conj();
                }
            }
        }
        Self::from_matrix_unchecked(out)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self(self.0.add(&other.0)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self(self.0.sub(&other.0)?))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `self + c I`
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)].re += c;
        }
        Self(m)
    }

    /// `U self U*` for a unitary (or isometric) `U`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        let m = u.matmul(&self.0)?.matmul(&u.adjoint())?;
        Ok(Self::from_matrix_unchecked(m))
    }

    /// `<A x, x>`, real for Hermitian `A`.
    pub fn quad_form(&self, x: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let xi = x[i];
            acc += self.0[(i, i)].re * xi.norm_sqr();
            for j in (i + 1)..n {
                acc += 2.0 * (xi.conj() * self.0[(i, j)] * x[j]).re;
            }
        }
        acc
    }

    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        jacobi_eigen(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectral_decompose().eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dimension is positive")
    }

    /// `g(A)` for an arbitrary real symbol `g`, with no domain check.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> f64) -> Self {
        self.spectral_decompose().rebuild_with(g)
    }
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot and then applies
/// the real symmetric rotation, so `A <- G* A G` with `G = diag(1, e^{-i phi}) R(c, s)` on (p, q).
fn jacobi_eigen(a: &CMatrix) -> SpectralDecomposition {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let target = 1e-13 * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.5 / theta
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let ph = phase.conj();

                // columns: col_p <- c col_p - s e^{-i phi} col_q ; col_q <- s col_p + c e^{-i phi} col_q
                for k in 0..n {
                    let xp = m[(k, p)];
                    let xq = m[(k, q)] * ph;
                    m[(k, p)] = xp * c - xq * s;
                    m[(k, q)] = xp * s + xq * c;
                    let vp = v[(k, p)];
                    let vq = v[(k, q)] * ph;
                    v[(k, p)] = vp * c - vq * s;
                    v[(k, q)] = vp * s + vq * c;
                }
                // rows: the adjoint action
                let phc = phase;
                for k in 0..n {
                    let xp = m[(p, k)];
                    let xq = m[(q, k)] * phc;
                    m[(p, k)] = xp * c - xq * s;
                    m[(q, k)] = xp * s + xq * c;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(app - t * r, 0.0);
                m[(q, q)] = Complex64::new(aqq + t * r, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    SpectralDecomposition { eigenvalues, eigenvectors }
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

pub fn spectral_decompose(a: &HermitianMatrix) -> SpectralDecomposition {
    a.spectral_decompose()
}

/// Checks every eigenvalue against `domain`, snapping values within [`SPECTRUM_TOL`] of a
/// closed endpoint onto it.
pub fn clamp_spectrum(eigs: &[f64], domain: &Interval) -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    let clamped: Vec<f64> = eigs
        .iter()
        .map(|&l| {
            let tol = SPECTRUM_TOL * l.abs().max(1.0);
            domain.clamp_within(l, tol).unwrap_or_else(|| {
                bad.push(l);
                l
            })
        })
        .collect();
    if bad.is_empty() {
        Ok(clamped)
    } else {
        Err(Error::SpectrumOutsideDomain { eigenvalues: bad, domain: domain.to_string() })
    }
}

/// Which scalar symbol of `f` to push through the functional calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    /// `f(t)`
    Value,
    /// `f'(t)`
    Deriv,
    /// `t f'(t)`
    TDeriv,
}

/// `g(A)` where `g` is `f`, `f'` or `t f'(t)`; the spectrum must lie in `f`'s domain.
pub fn calc_symbol(f: &ScalarFunction, a: &HermitianMatrix, symbol: Symbol) -> Result<HermitianMatrix> {
    let sd = a.spectral_decompose();
    let eigs = clamp_spectrum(&sd.eigenvalues, f.domain())?;
    let mapped: Vec<f64> = eigs
        .iter()
        .map(|&l| match symbol {
            Symbol::Value => f.eval_unchecked(l),
            Symbol::Deriv => f.deriv_unchecked(l),
            Symbol::TDeriv => f.tderiv_unchecked(l),
        })
        .collect();
    Ok(HermitianMatrix::from_eigensystem(&mapped, &sd.eigenvectors))
}

/// Functional calculus `f(A) = U f(diag lambda) U*`.
pub fn calc(f: &ScalarFunction, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    calc_symbol(f, a, Symbol::Value)
}

/// Outcome of `A <= B`: the verdict and `lambda_min(B - A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerCheck {
    pub holds: bool,
    pub slack: f64,
}

pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<LoewnerCheck> {
    let slack = b.sub(a)?.min_eigenvalue();
    Ok(LoewnerCheck { holds: slack >= -tol, slack })
}

/// `(A, B)` with `B <= A` and both spectra in `[m, M]`, `0 < m < M`.
pub fn random_dominated_pair(n: usize, m: f64, big_m: f64, seed: u64) -> Result<(HermitianMatrix, HermitianMatrix)> {
    if !(m > 0.0 && m < big_m && big_m.is_finite()) {
        return Err(Error::BadInterval { lo: m, hi: big_m });
    }
    if n == 0 {
        return Err(Error::BadDimensions("dimension must be positive".into()));
    }
    let mut rng = sampling::rng(seed);
    Ok(dominated_pair_in(&mut rng, n, m, big_m))
}

/// Same construction on any finite `[lo, hi]`: `A = Q diag(u) Q*`, `B = A - cP` with the
/// largest `c` in `(0, 1]` keeping `lambda_min(B) >= lo`.
pub fn dominated_pair_in<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    lo: f64,
    hi: f64,
) -> (HermitianMatrix, HermitianMatrix) {
    let a = sampling::random_hermitian_in(rng, n, lo, hi);
    let width = hi - lo;
    let p = sampling::random_psd(rng, n).scale(width * rng.random_range(0.1..=1.0));
    let feasible = |c: f64| a.sub(&p.scale(c)).expect("same dim").min_eigenvalue() >= lo;
    let c = if feasible(1.0) {
        1.0
    } else {
        let (mut good, mut bad) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (good + bad);
            if feasible(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let mut b = a.sub(&p.scale(c)).expect("same dim");
    // a rank-deficient P leaves eigenvalues of A - B at rounding level; push them to >= 0
    let scale = f64::EPSILON * (1.0 + lo.abs().max(hi.abs()));
    for _ in 0..8 {
        let s = a.sub(&b).expect("same dim").min_eigenvalue();
        if s >= 0.0 {
            break;
        }
        b = b.shift(2.0 * s - scale);
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian_in, random_unitary, rng};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rows(r: &[&[f64]]) -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn check_decomposition(a: &HermitianMatrix) {
        let sd = a.spectral_decompose();
        let n = a.dim();
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let rec = sd.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(rec <= 1e-10 * (1.0 + a.frobenius_norm()), "reconstruction {rec}");
        let u = &sd.eigenvectors;
        let unit = u.adjoint().matmul(u).unwrap().sub(&CMatrix::identity(n)).unwrap().frobenius_norm();
        assert!(unit <= 1e-10, "unitarity {unit}");
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(HermitianMatrix::diag(&[2.0, 1.0]).eigenvalues(), vec![1.0, 2.0]);
        let flip = rows(&[&[0.0, 1.0], &[1.0, 0.0]]).eigenvalues();
        assert_abs_diff_eq!(flip[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(flip[1], 1.0, epsilon = 1e-15);
        assert!(HermitianMatrix::identity(4).eigenvalues().iter().all(|&l| l == 1.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_parts(&[vec![1.0, 2.0], vec![0.0, 1.0]], None).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        let im =
            CMatrix::from_parts(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert!(HermitianMatrix::new(im).is_err());
        let ok =
            CMatrix::from_parts(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(&[vec![0.0, 1.0], vec![-1.0, 0.0]])).unwrap();
        assert!(HermitianMatrix::new(ok).is_ok());
    }

    #[test]
    fn decomposition_invariants_random() {
        let mut r = rng(17);
        for n in 1..=12 {
            for _ in 0..5 {
                let a = random_hermitian_in(&mut r, n, -5.0, 5.0);
                check_decomposition(&a);
            }
        }
        // repeated eigenvalues and a 32x32 instance
        check_decomposition(&crate::sampling::hermitian_with_spectrum(&mut r, &[1.0, 1.0, 1.0, -2.0, -2.0]));
        check_decomposition(&random_hermitian_in(&mut r, 32, -1.0, 1.0));
        check_decomposition(&HermitianMatrix::zeros(3));
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        use nalgebra::DMatrix;
        let mut r = rng(23);
        for n in [2, 3, 5, 8] {
            let a = random_hermitian_in(&mut r, n, -3.0, 3.0);
            let m = a.as_matrix();
            let nm = DMatrix::from_fn(n, n, |i, j| nalgebra::Complex::new(m[(i, j)].re, m[(i, j)].im));
            let mut reference: Vec<f64> = nm.symmetric_eigen().eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in a.eigenvalues().iter().zip(&reference) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn calc_examples() {
        let sq = ScalarFunction::power(2.0).unwrap().with_domain(Interval::real_line()).unwrap();
        let flip = rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let got = calc(&sq, &flip).unwrap();
        assert!(got.sub(&HermitianMatrix::identity(2)).unwrap().frobenius_norm() < 1e-14);

        let cube = ScalarFunction::power(3.0).unwrap();
        let ones = rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let got = calc(&cube, &ones).unwrap();
        let want = rows(&[&[4.0, 4.0], &[4.0, 4.0]]);
        assert!(got.sub(&want).unwrap().frobenius_norm() < 1e-13);

        let got = calc(&ScalarFunction::exp(), &HermitianMatrix::zeros(3)).unwrap();
        assert!(got.sub(&HermitianMatrix::identity(3)).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn calc_rejects_spectrum_outside_domain() {
        let a = HermitianMatrix::diag(&[-1.0, 0.5, 2.0]);
        match calc(&ScalarFunction::neglog(), &a) {
            Err(Error::SpectrumOutsideDomain { eigenvalues, .. }) => assert_eq!(eigenvalues, vec![-1.0]),
            other => panic!("unexpected {other:?}"),
        }
        // a tiny negative eigenvalue is snapped onto the closed endpoint 0
        let a = HermitianMatrix::diag(&[-1e-13, 1.0]);
        assert!(calc(&ScalarFunction::power(3.0).unwrap(), &a).is_ok());
    }

    #[test]
    fn calc_affine_and_commutation() {
        let mut r = rng(5);
        let aff = ScalarFunction::affine(2.5, -0.75).unwrap();
        for n in 1..=6 {
            let a = random_hermitian_in(&mut r, n, -2.0, 2.0);
            let got = calc(&aff, &a).unwrap();
            let want = a.scale(2.5).shift(-0.75);
            assert!(got.sub(&want).unwrap().frobenius_norm() <= 1e-12 * (1.0 + a.frobenius_norm()));

            let e = calc(&ScalarFunction::exp(), &a).unwrap();
            let ab = e.as_matrix().matmul(a.as_matrix()).unwrap();
            let ba = a.as_matrix().matmul(e.as_matrix()).unwrap();
            assert!(ab.sub(&ba).unwrap().frobenius_norm() < 1e-10);
            let mut fe: Vec<f64> = a.eigenvalues().iter().map(|l| l.exp()).collect();
            fe.sort_by(f64::total_cmp);
            for (x, y) in e.eigenvalues().iter().zip(&fe) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-11 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn calc_is_unitarily_covariant() {
        let mut r = rng(8);
        let f = ScalarFunction::power(3.0).unwrap();
        for n in 2..=5 {
            let a = random_hermitian_in(&mut r, n, 0.0, 3.0);
            let u = random_unitary(&mut r, n);
            let lhs = calc(&f, &a.conjugate_by(&u).unwrap()).unwrap();
            let rhs = calc(&f, &a).unwrap().conjugate_by(&u).unwrap();
            assert!(lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn pointwise_order_lifts() {
        // exp(t) >= 1 + t everywhere
        let mut r = rng(9);
        for n in 1..=5 {
            let a = random_hermitian_in(&mut r, n, -3.0, 3.0);
            let e = calc(&ScalarFunction::exp(), &a).unwrap();
            let l = calc(&ScalarFunction::affine(1.0, 1.0).unwrap(), &a).unwrap();
            assert!(e.sub(&l).unwrap().min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn loewner_examples() {
        let c = loewner_leq(&HermitianMatrix::zeros(2), &HermitianMatrix::identity(2), 0.0).unwrap();
        assert!(c.holds);
        assert_abs_diff_eq!(c.slack, 1.0, epsilon = 1e-15);
        let ones = rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let b = rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let c = loewner_leq(&ones, &b, 1e-12).unwrap();
        assert!(c.holds);
        assert_abs_diff_eq!(c.slack, 0.0, epsilon = 1e-15);
        let c = loewner_leq(&b, &ones, 1e-12).unwrap();
        assert!(!c.holds);
        assert_abs_diff_eq!(c.slack, -1.0, epsilon = 1e-15);
        assert!(matches!(loewner_leq(&ones, &HermitianMatrix::identity(3), 0.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn loewner_reflexive_antisymmetric() {
        let mut r = rng(31);
        for n in 1..=5 {
            let a = random_hermitian_in(&mut r, n, -1.0, 1.0);
            assert!(loewner_leq(&a, &a, 1e-12).unwrap().holds);
            let b = random_hermitian_in(&mut r, n, -1.0, 1.0);
            let ab = loewner_leq(&a, &b, 1e-12).unwrap().holds;
            let ba = loewner_leq(&b, &a, 1e-12).unwrap().holds;
            if ab && ba {
                assert!(a.sub(&b).unwrap().frobenius_norm() < 1e-10);
            }
        }
    }

    fn check_pair(n: usize, m: f64, big_m: f64, seed: u64) {
        let (a, b) = random_dominated_pair(n, m, big_m, seed).unwrap();
        assert!(loewner_leq(&b, &a, 0.0).unwrap().holds);
        for l in a.eigenvalues().into_iter().chain(b.eigenvalues()) {
            assert!(l >= m - 1e-10 && l <= big_m + 1e-10, "{l}");
        }
    }

    #[test]
    fn dominated_pair_examples() {
        check_pair(2, 1.0, 2.0, 7);
        check_pair(4, 1.0, 3.0, 1);
        for seed in 0..20 {
            let (a, b) = random_dominated_pair(1, 1.0, 2.0, seed).unwrap();
            let (a, b) = (a.as_matrix()[(0, 0)].re, b.as_matrix()[(0, 0)].re);
            assert!(1.0 - 1e-12 <= b && b <= a && a <= 2.0);
        }
        assert!(matches!(random_dominated_pair(2, 2.0, 1.0, 0), Err(Error::BadInterval { .. })));
        assert!(matches!(random_dominated_pair(2, 0.0, 1.0, 0), Err(Error::BadInterval { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dominated_pairs_satisfy_postconditions(n in 1usize..6, m in 0.1f64..2.0, w in 0.1f64..3.0, seed in 0u64..1000) {
            check_pair(n, m, m + w, seed);
        }
    }
}
