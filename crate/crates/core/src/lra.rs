//! Low-rank approximation through a range finder, with an optional
//! pre-multiplier, two-stage rank reduction and error diagnostics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::counters;
use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{
    numerical_rank, pinv_from_svd, pseudo_inverse, svd, thin_qr, DenseMatrix,
    LowRankFactors, Tolerance, DEFAULT_RANK_TOL,
};
use crate::multipliers::{apply, SketchOperator, Side};
use crate::rng::{self, Rng};
use crate::source::EntrySource;

/// Largest dimension the dense diagnostic will factor.
pub const DIAGNOSTIC_CAP: usize = 512;

/// Smallest sample for which the chi-square interval is reported.
pub const MIN_INTERVAL_SAMPLE: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeVariant {
    /// U is an orthonormal basis of MH.
    A,
    /// U is the rank-r truncation of MH.
    B,
}

fn range_basis(m: &DenseMatrix, h: &SketchOperator, r: usize, variant: RangeVariant) -> Result<DenseMatrix> {
    let (n, l) = h.shape();
    if n != m.cols() {
        return dim_err(format!("H has {n} rows, M has {} columns", m.cols()));
    }
    if r == 0 || r > l || l > n {
        return arg_err(format!("need 1 <= r <= l <= n, got r={r}, l={l}, n={n}"));
    }
    if l > m.rows() {
        return arg_err(format!("l = {l} exceeds the row count {}", m.rows()));
    }
    let mh = apply(h, m, Side::Right)?;
    let rank = numerical_rank(&mh, Tolerance::Relative(DEFAULT_RANK_TOL))?;
    if rank < r {
        return Err(Error::RangeFailure { rank, target: r });
    }
    match variant {
        RangeVariant::A => Ok(thin_qr(&mh)?.0),
        RangeVariant::B => {
            let d = svd(&mh)?.truncated(r);
            Ok(d.s.scale_cols(&d.sigma))
        }
    }
}

/// Range-finder LRA: U from MH, then V = U⁺M.
pub fn range_finder(m: &DenseMatrix, h: &SketchOperator, r: usize, variant: RangeVariant) -> Result<LowRankFactors> {
    let u = range_basis(m, h, r, variant)?;
    let v = match variant {
        RangeVariant::A => u.t_matmul(m)?,
        RangeVariant::B => pseudo_inverse(&u, DEFAULT_RANK_TOL)?.matmul(m)?,
    };
    LowRankFactors::new(u, v, r)
}

/// Range finder with a pre-multiplier F: V = (FU)⁺(FM), so only FM is read.
pub fn lra_premult(
    m: &DenseMatrix,
    f: &SketchOperator,
    h: &SketchOperator,
    r: usize,
    variant: RangeVariant,
) -> Result<LowRankFactors> {
    let (k, fm_rows) = f.shape();
    if fm_rows != m.rows() {
        return dim_err(format!("F has {fm_rows} columns, M has {} rows", m.rows()));
    }
    if k < h.cols() {
        return arg_err(format!("need l <= k, got l={}, k={k}", h.cols()));
    }
    let u = range_basis(m, h, r, variant)?;
    let fu = apply(f, &u, Side::Left)?;
    let d = svd(&fu)?;
    // FU can be tiny in absolute terms when F only reads rows where U vanishes
    let floor = 1e-12 * u.frobenius_norm();
    let rank = Tolerance::Relative(DEFAULT_RANK_TOL).rank_of(&d.sigma).min(d.sigma.iter().filter(|&&s| s > floor).count());
    if rank < r {
        return Err(Error::PremultRankFailure { rank, target: r });
    }
    let fm = apply(f, m, Side::Left)?;
    let v = pinv_from_svd(&d, rank).matmul(&fm)?;
    LowRankFactors::new(u, v, r)
}

/// Rank-r factors of UV from a QR of U and an SVD of the small l×n matrix R·V.
pub fn two_stage_truncate(f: &LowRankFactors, r: usize) -> Result<LowRankFactors> {
    let l = f.inner_dim();
    if r == 0 || r > l {
        return arg_err(format!("need 1 <= r <= l = {l}, got {r}"));
    }
    if f.u.rows() < l {
        return dim_err("two-stage truncation needs U with at least l rows");
    }
    let (q, ru) = thin_qr(&f.u)?;
    let d = svd(&ru.matmul(&f.v)?)?;
    let keep = r.min(d.rank());
    let mut u = q.matmul(&d.s.leading_cols(keep))?;
    let mut v = d.t.leading_cols(keep).scale_cols(&d.sigma[..keep]).transpose();
    if keep < r {
        u = u.hstack(&DenseMatrix::zeros(u.rows(), r - keep))?;
        v = v.vstack(&DenseMatrix::zeros(r - keep, v.cols()))?;
    }
    LowRankFactors::new(u, v, r)
}

/// Dense check of the deterministic range-finder bound.
///
/// With M = S Σ Tᵀ split at r and C₁ = T₁ᵀH, C₂ = T₂ᵀH, returns
/// `bound = ‖Σ₂‖_F² + ‖Σ₂C₂C₁⁺‖_F²` (a squared quantity) and
/// `achieved = ‖M − UV‖_F` for the variant-a range finder.
pub fn deterministic_error_diagnostic(m: &DenseMatrix, h: &SketchOperator, r: usize) -> Result<(f64, f64)> {
    let (rows, cols) = m.shape();
    if rows.max(cols) > DIAGNOSTIC_CAP {
        return Err(Error::CapExceeded { rows, cols, cap: DIAGNOSTIC_CAP });
    }
    let d = svd(m)?;
    let p = d.rank();
    if r > p {
        return arg_err(format!("r = {r} exceeds min(m, n) = {p}"));
    }
    let t1t = d.t.leading_cols(r).transpose();
    let c1 = apply(h, &t1t, Side::Right)?;
    let tail: Vec<usize> = (r..p).collect();
    let t2t = d.t.select_cols(&tail).transpose();
    let c2 = apply(h, &t2t, Side::Right)?;
    let sigma2 = &d.sigma[r..];
    let s2c2 = c2.scale_rows(sigma2);
    let cross = s2c2.matmul(&pseudo_inverse(&c1, DEFAULT_RANK_TOL)?)?;
    let bound = sigma2.iter().map(|s| s * s).sum::<f64>() + cross.frobenius_norm().powi(2);
    let f = range_finder(m, h, r, RangeVariant::A)?;
    let achieved = m.sub(&f.product())?.frobenius_norm();
    Ok((bound, achieved))
}

/// Sampled estimate of ‖M − UV‖_F.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LraErrorEstimate {
    pub estimate_frobenius: f64,
    pub sample_rows: usize,
    pub sample_cols: usize,
    /// 95% interval, present when q·s ≥ 100.
    pub confidence_interval: Option<(f64, f64)>,
}

/// Estimates ‖M − UV‖_F from a uniformly random q×s grid of error entries.
///
/// Reads exactly q·s entries of `m`. The interval treats the sampled errors
/// as i.i.d. centered Gaussian and inverts the chi-square law of their sum
/// of squares with q·s degrees of freedom.
pub fn posterior_error_estimate<S: EntrySource + ?Sized>(
    m: &S,
    f: &LowRankFactors,
    q: usize,
    s: usize,
    rng: &mut Rng,
) -> Result<LraErrorEstimate> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if f.u.rows() != rows || f.v.cols() != cols {
        return dim_err("factors do not match the matrix shape");
    }
    if q == 0 || s == 0 || q > rows || s > cols || q * s < 2 {
        return arg_err(format!("invalid sample grid {q}x{s} for a {rows}x{cols} matrix"));
    }
    let is = rng::random_subset(rows, q, rng);
    let js = rng::random_subset(cols, s, rng);
    let l = f.inner_dim();
    let mut sum_sq = 0.0;
    for &i in &is {
        let urow = f.u.row(i);
        for &j in &js {
            let approx: f64 = (0..l).map(|p| urow[p] * f.v.get(p, j)).sum();
            let e = m.entry(i, j) - approx;
            sum_sq += e * e;
        }
    }
    counters::add_flops(q * s * (2 * l + 1));
    let k = (q * s) as f64;
    let total = (rows * cols) as f64;
    let var = sum_sq / k;
    let estimate_frobenius = (total * var).sqrt();
    let confidence_interval = if q * s >= MIN_INTERVAL_SAMPLE {
        let chi = ChiSquared::new(k).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let lo = (total * sum_sq / chi.inverse_cdf(0.975)).sqrt();
        let hi = (total * sum_sq / chi.inverse_cdf(0.025)).sqrt();
        Some((lo, hi))
    } else {
        None
    };
    Ok(LraErrorEstimate { estimate_frobenius, sample_rows: q, sample_cols: s, confidence_interval })
}
