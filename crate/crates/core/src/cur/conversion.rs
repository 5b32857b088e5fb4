//! Conversions LRA → top SVD → CUR that read M only at the selected strips.

use serde::{Deserialize, Serialize};

use super::{maxvol_rect, CurDecomposition, GENERATOR_RANK_TOL};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::leverage::{sample_exactly, svd_leverage_scores};
use crate::linalg::{pseudo_inverse, svd, thin_qr, DenseMatrix, IndexSet, Svd, Tolerance, DEFAULT_RANK_TOL};
use crate::rng::Rng;
use crate::source::EntrySource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    /// Maxvol on the singular-vector factors.
    Deterministic,
    /// Leverage-score sampling with re-scaling on the singular-vector factors.
    Sampled,
}

/// Rank-r SVD of the product A·W·B (m×l, l×k, k×n) from thin QRs of A and Bᵀ
/// and an SVD of the l×k core R_A·W·R_Bᵀ. Pass W = I for a two-factor LRA.
pub fn lra_to_top_svd(a: &DenseMatrix, w: &DenseMatrix, b: &DenseMatrix, r: usize) -> Result<Svd> {
    let (l, k) = w.shape();
    if a.cols() != l || b.rows() != k {
        return dim_err(format!(
            "factors {}x{}, {}x{}, {}x{} are not conformable",
            a.rows(),
            a.cols(),
            l,
            k,
            b.rows(),
            b.cols()
        ));
    }
    if r == 0 || r > l.min(k) {
        return arg_err(format!("need 1 <= r <= min(k, l) = {}, got {r}", l.min(k)));
    }
    let (qa, ra) = thin_qr(a)?;
    let (qb, rb) = thin_qr(&b.transpose())?;
    let core = ra.matmul(w)?.matmul(&rb.transpose())?;
    let d = svd(&core)?;
    let rank = Tolerance::Relative(GENERATOR_RANK_TOL).rank_of(&d.sigma);
    if rank < r {
        return Err(Error::CoreRankFailure { rank, target: r });
    }
    let d = d.truncated(r);
    Ok(Svd { s: qa.matmul(&d.s)?, sigma: d.sigma, t: qb.matmul(&d.t)? })
}

/// CUR of M from its top SVD S·Σ·Tᵀ (rank r).
///
/// Rows come from S and columns from T, by maxvol or by leverage sampling.
/// The nucleus is the pseudo-inverse of the generator S_𝓘ΣT_𝓙ᵀ written in
/// factored form (T_𝓙ᵀ)⁺Σ⁻¹(S_𝓘)⁺, which equals T_𝓙Σ⁻¹S_𝓘ᵀ when k = l = r.
/// Sampled rows and columns are re-scaled and the nucleus becomes
/// D(T_𝓙ᵀD)⁺Σ⁻¹(D̄S_𝓘)⁺D̄.
#[allow(clippy::too_many_arguments)]
pub fn top_svd_to_cur<S: EntrySource + ?Sized>(
    m: &S,
    top: &Svd,
    k: usize,
    l: usize,
    h: f64,
    selector: Selector,
    rng: &mut Rng,
) -> Result<CurDecomposition> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let r = top.rank();
    if top.s.rows() != rows || top.t.rows() != cols {
        return dim_err("top SVD does not match the matrix shape");
    }
    if r == 0 || k < r || l < r || k > rows || l > cols {
        return arg_err(format!("need r <= k <= m and r <= l <= n, got r={r}, k={k}, l={l}"));
    }
    if top.sigma[r - 1] <= 0.0 {
        return arg_err("top SVD has a zero singular value");
    }
    let inv_sigma: Vec<f64> = top.sigma.iter().map(|s| 1.0 / s).collect();
    let swaps = 4 * r;
    let (i_set, j_set, scaling) = match selector {
        Selector::Deterministic => {
            let i = maxvol_rect(&top.s, k, h, swaps)?.indices().to_vec();
            let j = maxvol_rect(&top.t, l, h, swaps)?.indices().to_vec();
            (i, j, None)
        }
        Selector::Sampled => {
            let (i, di) = sample_exactly(&svd_leverage_scores(&top.s, 1.0)?, k, rng)?.collapse();
            let (j, dj) = sample_exactly(&svd_leverage_scores(&top.t, 1.0)?, l, rng)?.collapse();
            if i.len() < r || j.len() < r {
                return Err(Error::SelectionFailure(format!(
                    "sampling kept {} rows and {} columns, need {r}",
                    i.len(),
                    j.len()
                )));
            }
            (i, j, Some((di, dj)))
        }
    };
    let mut si = top.s.select_rows(&i_set);
    let mut tj = top.t.select_rows(&j_set);
    if let Some((di, dj)) = &scaling {
        si = si.scale_rows(di);
        tj = tj.scale_rows(dj);
    }
    let left = pseudo_inverse(&tj.transpose(), DEFAULT_RANK_TOL)?;
    let right = pseudo_inverse(&si, DEFAULT_RANK_TOL)?;
    let mut nucleus = left.scale_cols(&inv_sigma).matmul(&right)?;
    if let Some((di, dj)) = &scaling {
        nucleus = nucleus.scale_rows(dj).scale_cols(di);
    }
    let mut cur = CurDecomposition::new(IndexSet::new(i_set, rows)?, IndexSet::new(j_set, cols)?, nucleus, r)?;
    cur.scaling = scaling;
    Ok(cur)
}
