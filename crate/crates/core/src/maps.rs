//! Positive linear maps between matrix algebras and unital families of them.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::matrix::CMatrix;
use crate::sampling;

/// Unitality defect accepted by [`check_unital_family`].
pub const UNITAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum PositiveLinearMap {
    /// `X -> V* X V` with `V` of shape `n x k`.
    Conjugation { v: CMatrix },
    /// Keeps the diagonal blocks of a partition of `0..dim`, zeroes the rest.
    Pinch { dim: usize, blocks: Vec<Vec<usize>> },
    /// `X -> diag(X)`
    Diag { dim: usize },
}

impl PositiveLinearMap {
    pub fn conjugation(v: CMatrix) -> Self {
        Self::Conjugation { v }
    }

    pub fn pinch(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for &i in blocks.iter().flatten() {
            if i >= dim || seen[i] {
                return Err(Error::BadDimensions(format!("blocks {blocks:?} do not partition 0..{dim}")));
            }
            seen[i] = true;
        }
        if dim == 0 || seen.iter().any(|s| !s) {
            return Err(Error::BadDimensions(format!("blocks {blocks:?} do not partition 0..{dim}")));
        }
        Ok(Self::Pinch { dim, blocks })
    }

    pub fn diag(dim: usize) -> Self {
        Self::Diag { dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self::Conjugation { v: CMatrix::identity(dim) }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Self::Conjugation { v } => v.rows(),
            Self::Pinch { dim, .. } | Self::Diag { dim } => *dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Self::Conjugation { v } => v.cols(),
            Self::Pinch { dim, .. } | Self::Diag { dim } => *dim,
        }
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: x.dim() });
        }
        let m = x.as_matrix();
        let out = match self {
            Self::Conjugation { v } => v.adjoint().matmul(m)?.matmul(v)?,
            Self::Pinch { dim, blocks } => {
                let mut label = vec![0usize; *dim];
                for (b, block) in blocks.iter().enumerate() {
                    for &i in block {
                        label[i] = b;
                    }
                }
                CMatrix::from_fn(*dim, *dim, |i, j| if label[i] == label[j] { m[(i, j)] } else { Default::default() })
            }
            Self::Diag { dim } => {
                CMatrix::from_fn(*dim, *dim, |i, j| if i == j { m[(i, j)] } else { Default::default() })
            }
        };
        Ok(HermitianMatrix::from_matrix_unchecked(out))
    }
}

/// Maps `B(H) -> B(K)` sharing input and output dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFamily {
    maps: Vec<PositiveLinearMap>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitalCheck {
    pub unital: bool,
    /// `||sum_i Phi_i(I) - I||_F`
    pub defect: f64,
}

impl MapFamily {
    pub fn new(maps: Vec<PositiveLinearMap>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| Error::BadDimensions("empty map family".into()))?;
        let (n, k) = (first.input_dim(), first.output_dim());
        for m in &maps {
            if m.output_dim() != k {
                return Err(Error::DimensionMismatch { expected: k, found: m.output_dim() });
            }
            if m.input_dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.input_dim() });
            }
        }
        Ok(Self { maps })
    }

    pub fn single(map: PositiveLinearMap) -> Self {
        Self { maps: vec![map] }
    }

    pub fn maps(&self) -> &[PositiveLinearMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.maps[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.maps[0].output_dim()
    }

    /// `sum_i Phi_i(X_i)`
    pub fn sum_apply(&self, xs: &[HermitianMatrix]) -> Result<HermitianMatrix> {
        if xs.len() != self.maps.len() {
            return Err(Error::DimensionMismatch { expected: self.maps.len(), found: xs.len() });
        }
        let mut acc = HermitianMatrix::zeros(self.output_dim());
        for (m, x) in self.maps.iter().zip(xs) {
            acc = acc.add(&m.apply(x)?)?;
        }
        Ok(acc)
    }

    /// `sum_i Phi_i(g(X_i))` for a per-operand transform `g`.
    pub fn sum_apply_with(
        &self,
        xs: &[HermitianMatrix],
        mut g: impl FnMut(&HermitianMatrix) -> Result<HermitianMatrix>,
    ) -> Result<HermitianMatrix> {
        let mapped = xs.iter().map(&mut g).collect::<Result<Vec<_>>>()?;
        self.sum_apply(&mapped)
    }
}

pub fn check_unital_family(family: &MapFamily) -> Result<UnitalCheck> {
    let ids = vec![HermitianMatrix::identity(family.input_dim()); family.len()];
    let defect = family.sum_apply(&ids)?.sub(&HermitianMatrix::identity(family.output_dim()))?.frobenius_norm();
    Ok(UnitalCheck { unital: defect <= UNITAL_TOL, defect })
}

/// `count` conjugations `V_i` (`n x k`) cut from the first `k` columns of a Haar unitary of
/// size `count * n`, so that `sum V_i* V_i = I_k`.
pub fn random_unital_family(count: usize, n: usize, k: usize, seed: u64) -> Result<MapFamily> {
    if count == 0 || n == 0 || k == 0 || count * n < k {
        return Err(Error::BadDimensions(format!("need count*n >= k >= 1, got count={count}, n={n}, k={k}")));
    }
    let mut rng = sampling::rng(seed);
    Ok(unital_family_from(&mut rng, count, n, k))
}

pub(crate) fn unital_family_from<R: rand::Rng + ?Sized>(rng: &mut R, count: usize, n: usize, k: usize) -> MapFamily {
    let w = sampling::random_unitary(rng, count * n).leading_columns(k);
    let maps = (0..count).map(|i| PositiveLinearMap::conjugation(w.row_block(i * n, n))).collect();
    MapFamily { maps }
}
