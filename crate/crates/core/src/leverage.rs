//! SVD-based leverage scores, column sampling with re-scaling, and the CUR
//! built from them.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cur::{lra_to_top_svd, truncated_nucleus, CurDecomposition, GENERATOR_RANK_TOL};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{orthonormality_defect, svd, DenseMatrix, IndexSet, LowRankFactors, Tolerance};
use crate::lra::posterior_error_estimate;
use crate::rng::Rng;
use crate::source::EntrySource;

/// Largest tolerated ‖TᵀT − I‖ for score input.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Retries of the expected-count sampler before giving up.
pub const EMPTY_SAMPLE_RETRIES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeverageScores {
    pub p: Vec<f64>,
    pub beta: f64,
    pub r: usize,
}

impl LeverageScores {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Checks p_j ≥ (β/r)‖t_j‖² for every row t_j of T and Σp = 1.
    pub fn satisfies(&self, t: &DenseMatrix) -> bool {
        if t.rows() != self.p.len() || self.r == 0 {
            return false;
        }
        let sum: f64 = self.p.iter().sum();
        let floor = self.beta / self.r as f64;
        (sum - 1.0).abs() <= 1e-12 * self.p.len().max(1) as f64
            && t.row_norms_sq().iter().zip(&self.p).all(|(t2, &p)| p >= floor * t2 - 1e-15)
    }
}

/// p_j = ‖t_j‖²/r for T with r orthonormal columns.
pub fn svd_leverage_scores(t: &DenseMatrix, beta: f64) -> Result<LeverageScores> {
    if !(beta > 0.0 && beta <= 1.0) {
        return arg_err(format!("beta must lie in (0, 1], got {beta}"));
    }
    let r = t.cols();
    if r == 0 || r > t.rows() {
        return arg_err(format!("need 1 <= r <= n, got a {}x{r} basis", t.rows()));
    }
    let deviation = orthonormality_defect(t);
    if deviation > ORTHONORMAL_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let p = t.row_norms_sq().into_iter().map(|v| v / r as f64).collect();
    Ok(LeverageScores { p, beta, r })
}

/// p_j = 1/n.
pub fn uniform_scores(n: usize) -> LeverageScores {
    LeverageScores { p: vec![1.0 / n as f64; n], beta: 1.0, r: 1 }
}

/// max_j |p_j(G) − ‖g_j‖²/(nr)| for an r×n matrix G, scores taken from the
/// right singular vectors of G/√n.
pub fn gaussian_score_gap(g: &DenseMatrix) -> Result<f64> {
    let (r, n) = g.shape();
    if r == 0 || r > n {
        return arg_err(format!("need 1 <= r <= n, got {r}x{n}"));
    }
    let d = svd(&g.scaled(1.0 / (n as f64).sqrt()))?;
    let scores = svd_leverage_scores(&d.t.leading_cols(r), 1.0)?;
    let col_norms = g.col_norms_sq();
    let nr = (n * r) as f64;
    Ok(scores.p.iter().zip(col_norms).map(|(p, c)| (p - c / nr).abs()).fold(0.0, f64::max))
}

/// Selected indices (a multiset) with the matching re-scaling factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRescale {
    pub indices: Vec<usize>,
    pub scale: Vec<f64>,
}

impl SampleRescale {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Merges repeated indices into one with weight √(Σd²), sorted by index.
    ///
    /// Keeps (SD)(SD)ᵀ unchanged, so every Gram-type quantity of the sample is
    /// the same as for the multiset.
    pub fn collapse(&self) -> (Vec<usize>, Vec<f64>) {
        let mut pairs: Vec<(usize, f64)> = self.indices.iter().copied().zip(self.scale.iter().map(|d| d * d)).collect();
        pairs.sort_by_key(|&(i, _)| i);
        let mut idx: Vec<usize> = Vec::new();
        let mut w: Vec<f64> = Vec::new();
        for (i, d2) in pairs {
            if idx.last() == Some(&i) {
                *w.last_mut().expect("same length") += d2;
            } else {
                idx.push(i);
                w.push(d2);
            }
        }
        (idx, w.into_iter().map(f64::sqrt).collect())
    }
}

/// Exactly(l): l i.i.d. draws with P(i) = p_i and d_t = 1/√(l·p_{i_t}).
pub fn sample_exactly(scores: &LeverageScores, l: usize, rng: &mut Rng) -> Result<SampleRescale> {
    if l == 0 {
        return arg_err("sample size must be at least 1");
    }
    let dist = WeightedIndex::new(&scores.p).map_err(|e| Error::InvalidArgument(format!("bad scores: {e}")))?;
    let lf = l as f64;
    let indices: Vec<usize> = (0..l).map(|_| dist.sample(rng)).collect();
    let scale = indices.iter().map(|&i| 1.0 / (lf * scores.p[i]).sqrt()).collect();
    Ok(SampleRescale { indices, scale })
}

/// Expected(l): index j kept with probability min(1, l·p_j), d_j = 1/min(1, √(l·p_j)).
pub fn sample_expected(scores: &LeverageScores, l: usize, rng: &mut Rng) -> Result<SampleRescale> {
    if l == 0 {
        return arg_err("sample size must be at least 1");
    }
    let lf = l as f64;
    let mut indices = Vec::new();
    let mut scale = Vec::new();
    for (j, &p) in scores.p.iter().enumerate() {
        let prob = (lf * p).min(1.0);
        if prob > 0.0 && rng.random::<f64>() < prob {
            indices.push(j);
            scale.push(1.0 / (lf * p).sqrt().min(1.0));
        }
    }
    if indices.is_empty() {
        return Err(Error::EmptySample { attempts: 1 });
    }
    Ok(SampleRescale { indices, scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Exact,
    Expected,
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "exactly" => Ok(SamplingMode::Exact),
            "expected" => Ok(SamplingMode::Expected),
            _ => arg_err(format!("unknown sampling mode {s:?}")),
        }
    }
}

/// Runs the chosen sampler, retrying the expected-count one on empty draws.
pub fn sample(scores: &LeverageScores, l: usize, mode: SamplingMode, rng: &mut Rng) -> Result<SampleRescale> {
    match mode {
        SamplingMode::Exact => sample_exactly(scores, l, rng),
        SamplingMode::Expected => {
            for _ in 0..EMPTY_SAMPLE_RETRIES {
                match sample_expected(scores, l, rng) {
                    Err(Error::EmptySample { .. }) => continue,
                    other => return other,
                }
            }
            Err(Error::EmptySample { attempts: EMPTY_SAMPLE_RETRIES })
        }
    }
}

/// Options of the leverage-score CUR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeverageCurOptions {
    pub beta: f64,
    pub beta_bar: f64,
    pub mode: SamplingMode,
    /// Use the unweighted nucleus (W_{𝓘,𝓙})_r⁺.
    pub alternative_nucleus: bool,
}

impl Default for LeverageCurOptions {
    fn default() -> Self {
        LeverageCurOptions { beta: 1.0, beta_bar: 1.0, mode: SamplingMode::Exact, alternative_nucleus: false }
    }
}

/// CUR by leverage-score sampling of l columns and then k rows.
///
/// Column scores come from the dense SVD of M unless `scores` is given. Row
/// scores come from the top-r left singular vectors of CD. Repeated draws are
/// merged (see [`SampleRescale::collapse`]), so the output may hold fewer
/// than k rows or l columns. The nucleus is D·(D̄ W_{𝓘,𝓙} D)_r⁺·D̄.
#[allow(clippy::too_many_arguments)]
pub fn cur_via_leverage<S: EntrySource + ?Sized>(
    m: &S,
    r: usize,
    k: usize,
    l: usize,
    opts: LeverageCurOptions,
    scores: Option<&LeverageScores>,
    rng: &mut Rng,
) -> Result<CurDecomposition> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if r == 0 || k < r || l < r || r > rows.min(cols) {
        return arg_err(format!("need k, l >= r >= 1 and r <= min(m, n), got r={r}, k={k}, l={l}"));
    }
    if !(opts.beta_bar > 0.0 && opts.beta_bar <= 1.0) {
        return arg_err(format!("beta_bar must lie in (0, 1], got {}", opts.beta_bar));
    }
    let owned;
    let col_scores = match scores {
        Some(s) if s.len() != cols => return arg_err(format!("{} scores for {cols} columns", s.len())),
        Some(s) => s,
        None => {
            let d = svd(&m.to_dense())?;
            let rank = Tolerance::Relative(GENERATOR_RANK_TOL).rank_of(&d.sigma);
            if rank < r {
                return Err(Error::GeneratorRankFailure { rank, target: r });
            }
            owned = svd_leverage_scores(&d.t.leading_cols(r), opts.beta)?;
            &owned
        }
    };
    let (j_set, d_col) = sample(col_scores, l, opts.mode, rng)?.collapse();
    let cd = m.col_strip(&j_set).scale_cols(&d_col);
    let dc = svd(&cd)?;
    let rank = Tolerance::Relative(GENERATOR_RANK_TOL).rank_of(&dc.sigma);
    if rank < r {
        return Err(Error::GeneratorRankFailure { rank, target: r });
    }
    let row_scores = svd_leverage_scores(&dc.s.leading_cols(r), opts.beta_bar)?;
    let (i_set, d_row) = sample(&row_scores, k, opts.mode, rng)?.collapse();
    if i_set.len() < r || j_set.len() < r {
        return Err(Error::GeneratorRankFailure { rank: i_set.len().min(j_set.len()), target: r });
    }
    let g = m.submatrix(&i_set, &j_set);
    let (nucleus, alt) = if opts.alternative_nucleus {
        (truncated_nucleus(&g, r)?, true)
    } else {
        let inner = truncated_nucleus(&g.scale_rows(&d_row).scale_cols(&d_col), r)?;
        (inner.scale_rows(&d_col).scale_cols(&d_row), false)
    };
    let mut cur = CurDecomposition::new(IndexSet::new(i_set, rows)?, IndexSet::new(j_set, cols)?, nucleus, r)?;
    cur.alternative_nucleus = alt;
    cur.scaling = Some((d_row, d_col));
    Ok(cur)
}

/// Outcome of [`refine_lra`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub cur: CurDecomposition,
    /// Sampled Frobenius error of the crude LRA.
    pub crude_estimate: f64,
    /// Sampled Frobenius error of the refined CUR on the same entries.
    pub refined_estimate: f64,
    /// Sampled Frobenius norm of M on the same entries.
    pub norm_estimate: f64,
    /// Set when the crude LRA is far off (relative error above 1/2) or the
    /// refined error exceeds 1.5 times the crude one.
    pub degraded: bool,
}

/// Grid side of the error samples taken by [`refine_lra`].
const REFINE_SAMPLE: usize = 10;

/// Leverage-score CUR driven by the scores of a crude LRA UV of M.
///
/// The top SVD of UV is computed from the factors alone, so M is read only
/// at the sampled generator, the C and R strips and a small error sample.
pub fn refine_lra<S: EntrySource + ?Sized>(
    m: &S,
    crude: &LowRankFactors,
    r: usize,
    k: usize,
    l: usize,
    rng: &mut Rng,
) -> Result<Refinement> {
    if crude.target_rank < r {
        return arg_err(format!("crude LRA has target rank {} < {r}", crude.target_rank));
    }
    let inner = crude.inner_dim();
    let top = lra_to_top_svd(&crude.u, &DenseMatrix::identity(inner), &crude.v, r)?;
    let scores = svd_leverage_scores(&top.t, 1.0)?;
    let cur = cur_via_leverage(m, r, k, l, LeverageCurOptions::default(), Some(&scores), rng)?;

    let (rows, cols) = (m.nrows(), m.ncols());
    let (q, s) = (rows.min(REFINE_SAMPLE), cols.min(REFINE_SAMPLE));
    let grid_rng = rng.clone();
    let crude_estimate = posterior_error_estimate(m, crude, q, s, &mut grid_rng.clone())?.estimate_frobenius;
    let cu = cur.c_factor(m).matmul(&cur.nucleus)?;
    let refined = LowRankFactors::new(cu, cur.r_factor(m), r)?;
    let refined_estimate = posterior_error_estimate(m, &refined, q, s, &mut grid_rng.clone())?.estimate_frobenius;
    let zero = LowRankFactors::new(DenseMatrix::zeros(rows, 1), DenseMatrix::zeros(1, cols), 1)?;
    let mut last = grid_rng;
    let norm_estimate = posterior_error_estimate(m, &zero, q, s, &mut last)?.estimate_frobenius;
    *rng = last;
    let degraded = crude_estimate > 0.5 * norm_estimate || refined_estimate > 1.5 * crude_estimate;
    Ok(Refinement { cur, crude_estimate, refined_estimate, norm_estimate, degraded })
}

/// l₋ = 3200 r²/(ε²β), the sample size for Exactly(l).
pub fn exactly_sample_bound(r: usize, eps: f64, beta: f64) -> f64 {
    3200.0 * (r * r) as f64 / (eps * eps * beta)
}

/// l₋ = c̄ r ln r/(ε²β), the sample size for Expected(l).
pub fn expected_sample_bound(r: usize, eps: f64, beta: f64, c_bar: f64) -> f64 {
    c_bar * r as f64 * (r as f64).ln() / (eps * eps * beta)
}

/// ε_{r,l,δ} = √(4r ln(2r/δ)/l).
pub fn epsilon_rld(r: usize, l: usize, delta: f64) -> f64 {
    (4.0 * r as f64 * (2.0 * r as f64 / delta).ln() / l as f64).sqrt()
}
