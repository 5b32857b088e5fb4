use std::sync::Once;

use faer::Par;
use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use crate::counters;
use crate::error::{arg_err, Error, Result};

static SEQUENTIAL: Once = Once::new();

/// Dense factorizations run single-threaded so results do not depend on the
/// thread count; callers parallelize across independent problems instead.
fn sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Compact SVD `M = S · diag(sigma) · Tᵀ` with nonincreasing `sigma`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Svd {
    pub s: DenseMatrix,
    pub sigma: Vec<f64>,
    pub t: DenseMatrix,
}

impl Svd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Keeps the leading `r` triplets.
    pub fn truncated(&self, r: usize) -> Svd {
        let r = r.min(self.sigma.len());
        Svd {
            s: self.s.leading_cols(r),
            sigma: self.sigma[..r].to_vec(),
            t: self.t.leading_cols(r),
        }
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.s
            .scale_cols(&self.sigma)
            .matmul(&self.t.transpose())
            .expect("svd factors are conformable")
    }
}

/// How a rank threshold is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tolerance {
    /// Count σ_j > tol.
    Absolute(f64),
    /// Count σ_j > tol·σ_1.
    Relative(f64),
}

impl Tolerance {
    pub fn threshold(&self, sigma1: f64) -> f64 {
        match *self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(t) => t * sigma1,
        }
    }

    /// Number of values above the threshold in a nonincreasing sequence.
    pub fn rank_of(&self, sigma: &[f64]) -> usize {
        let Some(&s1) = sigma.first() else { return 0 };
        let th = self.threshold(s1);
        sigma.iter().take_while(|&&s| s > th && s > 0.0).count()
    }
}

/// Default relative rank threshold of the pseudo-inverse.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Compact SVD backed by faer's divide-and-conquer SVD, reordered so the
/// singular values are nonincreasing and sign-normalized so that the
/// largest-magnitude entry of each left singular vector is nonnegative.
pub fn svd(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(Svd {
            s: DenseMatrix::zeros(m, 0),
            sigma: vec![],
            t: DenseMatrix::zeros(n, 0),
        });
    }
    counters::add_flops(4 * m * n * k + 8 * k * k * k);
    check_finite(a)?;
    sequential();
    let dec = a.to_faer().thin_svd().map_err(|_| Error::NonConvergence)?;
    let (u, v) = (dec.U(), dec.V());
    let sv = dec.S().column_vector();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let mut s = DenseMatrix::from_fn(m, k, |i, c| u[(i, order[c])]);
    let mut t = DenseMatrix::from_fn(n, k, |j, c| v[(j, order[c])]);
    for c in 0..k {
        let mut best = 0.0f64;
        let mut val = 0.0;
        for i in 0..m {
            let v = s.get(i, c);
            if v.abs() > best {
                best = v.abs();
                val = v;
            }
        }
        if val < 0.0 {
            for i in 0..m {
                s.set(i, c, -s.get(i, c));
            }
            for j in 0..n {
                t.set(j, c, -t.get(j, c));
            }
        }
    }
    Ok(Svd { s, sigma, t })
}

fn check_finite(a: &DenseMatrix) -> Result<()> {
    match a.data().iter().position(|v| !v.is_finite()) {
        Some(p) => Err(Error::NonFinite { row: p / a.cols(), col: p % a.cols() }),
        None => Ok(()),
    }
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if m.min(n) == 0 {
        return Ok(vec![]);
    }
    counters::add_flops(4 * m * n * m.min(n));
    check_finite(a)?;
    sequential();
    let mut s = a.to_faer().singular_values().map_err(|_| Error::NonConvergence)?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Moore–Penrose pseudo-inverse keeping σ_j > rank_tol·σ_1.
pub fn pseudo_inverse(a: &DenseMatrix, rank_tol: f64) -> Result<DenseMatrix> {
    let d = svd(a)?;
    let keep = Tolerance::Relative(rank_tol).rank_of(&d.sigma);
    Ok(pinv_from_svd(&d, keep))
}

/// `T_k · Σ_k⁻¹ · S_kᵀ` from a precomputed SVD.
pub fn pinv_from_svd(d: &Svd, keep: usize) -> DenseMatrix {
    let (m, n) = (d.s.rows(), d.t.rows());
    if keep == 0 {
        return DenseMatrix::zeros(n, m);
    }
    let inv: Vec<f64> = d.sigma[..keep].iter().map(|s| 1.0 / s).collect();
    d.t.leading_cols(keep)
        .scale_cols(&inv)
        .matmul(&d.s.leading_cols(keep).transpose())
        .expect("svd factors are conformable")
}

pub fn numerical_rank(a: &DenseMatrix, tol: Tolerance) -> Result<usize> {
    match tol {
        Tolerance::Absolute(t) | Tolerance::Relative(t) if t <= 0.0 => {
            return arg_err("rank tolerance must be positive")
        }
        _ => {}
    }
    Ok(tol.rank_of(&singular_values(a)?))
}

pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.frobenius_norm()
}

/// κ = σ_1/σ_ρ where ρ is the numerical rank at the relative threshold.
pub fn condition_number(a: &DenseMatrix, rank_tol: f64) -> Result<f64> {
    let s = singular_values(a)?;
    let rho = Tolerance::Relative(rank_tol).rank_of(&s);
    if rho == 0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(s[0] / s[rho - 1])
}
