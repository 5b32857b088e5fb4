//! Dense matrices and the deterministic factorizations the algorithms rely on.

mod complex;
mod matrix;
mod qr;
mod svd;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Result};

pub use complex::ComplexMatrix;
pub use matrix::{dot, matmul, norm2, DenseMatrix};
pub use qr::{pivoted_qr, solve_upper, thin_qr};
pub use svd::{
    condition_number, frobenius_norm, numerical_rank, pinv_from_svd, pseudo_inverse,
    singular_values, spectral_norm, svd, Svd, Tolerance, DEFAULT_RANK_TOL,
};

/// Ordered sequence of distinct indices below `bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    bound: usize,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, bound: usize) -> Result<Self> {
        let mut seen = vec![false; bound];
        for &i in &indices {
            if i >= bound {
                return arg_err(format!("index {i} out of bound {bound}"));
            }
            if seen[i] {
                return arg_err(format!("duplicate index {i}"));
            }
            seen[i] = true;
        }
        Ok(IndexSet { indices, bound })
    }

    pub fn range(k: usize, bound: usize) -> Self {
        IndexSet { indices: (0..k).collect(), bound }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Matrix norms used for error reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Spectral,
    Frobenius,
    Chebyshev,
}

pub fn norm(a: &DenseMatrix, which: Norm) -> Result<f64> {
    Ok(match which {
        Norm::Spectral => spectral_norm(a)?,
        Norm::Frobenius => a.frobenius_norm(),
        Norm::Chebyshev => a.max_abs(),
    })
}

/// Low-rank factors `U` (m×l) and `V` (l×n) approximating a matrix at target rank r ≤ l.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowRankFactors {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub target_rank: usize,
}

impl LowRankFactors {
    pub fn new(u: DenseMatrix, v: DenseMatrix, target_rank: usize) -> Result<Self> {
        if u.cols() != v.rows() {
            return dim_err(format!("U has {} columns, V has {} rows", u.cols(), v.rows()));
        }
        if target_rank > u.cols() {
            return arg_err(format!("target rank {target_rank} exceeds l = {}", u.cols()));
        }
        Ok(LowRankFactors { u, v, target_rank })
    }

    pub fn inner_dim(&self) -> usize {
        self.u.cols()
    }

    pub fn product(&self) -> DenseMatrix {
        self.u.matmul(&self.v).expect("factors are conformable")
    }

    /// Entry (i, j) of U·V.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (0..self.u.cols()).map(|p| self.u.get(i, p) * self.v.get(p, j)).sum()
    }
}

/// Best rank-ρ approximation `(S_ρ Σ_ρ, T_ρᵀ)`.
pub fn truncate_rank(a: &DenseMatrix, rho: usize) -> Result<LowRankFactors> {
    let (m, n) = a.shape();
    if rho == 0 || rho > m.min(n) {
        return arg_err(format!("rank {rho} outside 1..={}", m.min(n)));
    }
    let d = svd(a)?.truncated(rho);
    LowRankFactors::new(d.s.scale_cols(&d.sigma), d.t.transpose(), rho)
}

/// ‖QᵀQ − I‖_F for a matrix expected to have orthonormal columns.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.t_matmul(q).expect("square gram");
    g.sub(&DenseMatrix::identity(q.cols())).expect("same shape").frobenius_norm()
}
