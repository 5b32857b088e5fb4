//! Hierarchical block approximation: dense diagonal leaves plus low-rank
//! generators F·H for the off-diagonal blocks of a recursive 2×2 partition.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cur::{cross_approx, lra_to_top_svd, DEFAULT_H};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{norm, pseudo_inverse, svd, DenseMatrix, IndexSet, LowRankFactors, Norm, Svd};
use crate::lra::posterior_error_estimate;
use crate::rng::{self, Rng};
use crate::source::{BlockView, EntrySource, Memo};

/// Cross-approximation loops per off-diagonal block.
pub const CA_LOOPS: usize = 2;

/// Side of the sampled error grid used to pick a block rank.
const ERROR_SAMPLE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HssStrategy {
    /// Dense SVD truncation of each block.
    Svd,
    /// Cross-approximation on each block, read through the entry oracle.
    CurCa,
}

impl std::str::FromStr for HssStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(HssStrategy::Svd),
            "cur_ca" | "cur-ca" | "ca" => Ok(HssStrategy::CurCa),
            _ => arg_err(format!("unknown HSS strategy {s:?}")),
        }
    }
}

/// One off-diagonal block M[row0.., col0..] ≈ F·H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HssGenerator {
    pub level: usize,
    pub row0: usize,
    pub col0: usize,
    pub rows: usize,
    pub cols: usize,
    pub f: DenseMatrix,
    pub h: DenseMatrix,
    /// Relative error of the block approximation (exact for svd, sampled for cur_ca).
    pub rel_error: f64,
    /// Set when rank r did not reach the tolerance.
    pub overflow: bool,
}

impl HssGenerator {
    pub fn rank(&self) -> usize {
        self.f.cols()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HssMatrix {
    pub n: usize,
    pub depth: usize,
    pub leaf: usize,
    pub rank: usize,
    pub strategy: HssStrategy,
    /// 2^depth leaf blocks along the diagonal.
    pub diag: Vec<DenseMatrix>,
    pub generators: Vec<HssGenerator>,
}

impl HssMatrix {
    pub fn overflow_count(&self) -> usize {
        self.generators.iter().filter(|g| g.overflow).count()
    }

    pub fn stored_entries(&self) -> usize {
        let d: usize = self.diag.iter().map(|b| b.rows() * b.cols()).sum();
        let g: usize = self.generators.iter().map(|g| g.f.rows() * g.f.cols() + g.h.rows() * g.h.cols()).sum();
        d + g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hss matrices serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

struct BlockSpec {
    level: usize,
    row0: usize,
    col0: usize,
    size: usize,
}

fn off_diagonal_blocks(n: usize, depth: usize) -> Vec<BlockSpec> {
    let mut out = Vec::new();
    for level in 1..=depth {
        let size = n >> level;
        for p in 0..(1usize << (level - 1)) {
            let base = 2 * p * size;
            out.push(BlockSpec { level, row0: base, col0: base + size, size });
            out.push(BlockSpec { level, row0: base + size, col0: base, size });
        }
    }
    out
}

fn empty_factors(rows: usize, cols: usize) -> (DenseMatrix, DenseMatrix) {
    (DenseMatrix::zeros(rows, 0), DenseMatrix::zeros(0, cols))
}

fn svd_block(block: &DenseMatrix, r: usize, tol: f64) -> Result<(DenseMatrix, DenseMatrix, f64, bool)> {
    let d = svd(block)?;
    let s1 = d.sigma.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        let (f, h) = empty_factors(block.rows(), block.cols());
        return Ok((f, h, 0.0, false));
    }
    let tail = |rho: usize| d.sigma.get(rho).copied().unwrap_or(0.0) / s1;
    let cap = r.min(d.rank());
    let rho = (0..=cap).find(|&rho| tail(rho) <= tol).unwrap_or(cap);
    let t = d.truncated(rho);
    Ok((t.s.scale_cols(&t.sigma), t.t.transpose(), tail(rho), tail(rho) > tol))
}

/// Relative cutoff for the pseudo-inverse of the oversampled generator.
const GENERATOR_PINV_TOL: f64 = 1e-8;

/// Top SVD of rank ρ ≤ r from an oversampled C–A run (k = l = min(2ρ, size)),
/// lowering ρ when the generator is deficient. The nucleus is the full
/// pseudo-inverse of the k×l generator; the rank-ρ cut happens on C·G⁺·R.
fn ca_top_svd<S: EntrySource + ?Sized>(b: &S, r: usize, rng: &mut Rng) -> Result<Option<Svd>> {
    let (rows, cols) = (b.nrows(), b.ncols());
    let mut rho = r.min(rows).min(cols);
    while rho > 0 {
        let (k, l) = ((2 * rho).min(rows), (2 * rho).min(cols));
        let init = IndexSet::new(rng::random_subset(rows, k, rng), rows)?;
        let attempt = cross_approx(b, rho, k, l, &init, CA_LOOPS, DEFAULT_H, None, rng)
            .and_then(|(cur, _)| {
                let c = cur.c_factor(b);
                let g = c.select_rows(cur.row_set.indices());
                lra_to_top_svd(&c, &pseudo_inverse(&g, GENERATOR_PINV_TOL)?, &cur.r_factor(b), rho)
            });
        match attempt {
            Ok(top) => return Ok(Some(top)),
            Err(Error::GeneratorRankFailure { rank, .. }) | Err(Error::CoreRankFailure { rank, .. }) => {
                rho = rank.min(rho - 1)
            }
            Err(Error::SelectionFailure(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn ca_block<S: EntrySource + ?Sized>(
    b: &S,
    r: usize,
    tol: f64,
    rng: &mut Rng,
) -> Result<(DenseMatrix, DenseMatrix, f64, bool)> {
    let (rows, cols) = (b.nrows(), b.ncols());
    let top = ca_top_svd(b, r, rng)?;
    let (q, s) = (rows.min(ERROR_SAMPLE), cols.min(ERROR_SAMPLE));
    let grid = rng.clone();
    let zero = LowRankFactors::new(DenseMatrix::zeros(rows, 1), DenseMatrix::zeros(1, cols), 1)?;
    let block_norm = posterior_error_estimate(b, &zero, q, s, &mut grid.clone())?.estimate_frobenius;
    let Some(top) = top else {
        let (f, h) = empty_factors(rows, cols);
        return Ok((f, h, if block_norm == 0.0 { 0.0 } else { 1.0 }, block_norm > 0.0));
    };
    if block_norm == 0.0 {
        let (f, h) = empty_factors(rows, cols);
        return Ok((f, h, 0.0, false));
    }
    let rel = |rho: usize| -> Result<f64> {
        let t = top.truncated(rho);
        let f = LowRankFactors::new(t.s.scale_cols(&t.sigma), t.t.transpose(), rho)?;
        Ok(posterior_error_estimate(b, &f, q, s, &mut grid.clone())?.estimate_frobenius / block_norm)
    };
    // smallest rank within tolerance; the error of nested truncations is nonincreasing in ρ
    let full = top.rank();
    let full_err = rel(full)?;
    let (mut lo, mut hi, mut hi_err) = (0usize, full, full_err);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let e = rel(mid)?;
        if e <= tol {
            (hi, hi_err) = (mid, e);
        } else {
            lo = mid;
        }
    }
    let rho = if full_err <= tol { hi } else { full };
    let err = if full_err <= tol { hi_err } else { full_err };
    let t = top.truncated(rho);
    Ok((t.s.scale_cols(&t.sigma), t.t.transpose(), err, err > tol))
}

/// Builds the hierarchical approximation of a square n×n matrix.
///
/// Depth L splits M into 2^L leaf blocks of size b = n/2^L kept densely; at
/// each level the two off-diagonal blocks of every node get a generator pair
/// of rank at most r, the smallest that meets `tol` relative to the block.
/// Blocks are processed in parallel with per-block seeds derived from `rng`.
pub fn build_hss<S: EntrySource + ?Sized>(
    m: &S,
    depth: usize,
    r: usize,
    tol: f64,
    strategy: HssStrategy,
    rng: &mut Rng,
) -> Result<HssMatrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return dim_err(format!("HSS needs a square matrix, got {n}x{}", m.ncols()));
    }
    if depth >= usize::BITS as usize || n % (1usize << depth) != 0 {
        return arg_err(format!("n = {n} is not divisible by 2^{depth}"));
    }
    let leaf = n >> depth;
    if r == 0 || leaf < r {
        return arg_err(format!("need 1 <= r <= leaf size {leaf}, got {r}"));
    }
    if !(tol >= 0.0) {
        return arg_err("tol must be nonnegative");
    }
    let master: u64 = rng.random();
    let diag: Vec<DenseMatrix> = (0..(1usize << depth))
        .map(|i| {
            let idx: Vec<usize> = (i * leaf..(i + 1) * leaf).collect();
            m.submatrix(&idx, &idx)
        })
        .collect();
    let specs = off_diagonal_blocks(n, depth);
    let generators = specs
        .par_iter()
        .enumerate()
        .map(|(t, spec)| {
            let view = BlockView::new(m, spec.row0, spec.col0, spec.size, spec.size);
            let (f, h, rel_error, overflow) = match strategy {
                HssStrategy::Svd => svd_block(&view.to_dense(), r, tol)?,
                HssStrategy::CurCa => {
                    let mut g = rng::from_seed(rng::derive_seed(master, t as u64));
                    ca_block(&Memo::new(view), r, tol, &mut g)?
                }
            };
            Ok(HssGenerator {
                level: spec.level,
                row0: spec.row0,
                col0: spec.col0,
                rows: spec.size,
                cols: spec.size,
                f,
                h,
                rel_error,
                overflow,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HssMatrix { n, depth, leaf, rank: r, strategy, diag, generators })
}

/// y = H·x using the leaf blocks and generator pairs only.
pub fn hss_matvec(h: &HssMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != h.n {
        return dim_err(format!("x has length {}, expected {}", x.len(), h.n));
    }
    let mut y = vec![0.0; h.n];
    for (i, d) in h.diag.iter().enumerate() {
        let off = i * h.leaf;
        let part = d.matvec(&x[off..off + h.leaf])?;
        for (a, v) in y[off..off + h.leaf].iter_mut().zip(part) {
            *a += v;
        }
    }
    for g in &h.generators {
        if g.rank() == 0 {
            continue;
        }
        let t = g.h.matvec(&x[g.col0..g.col0 + g.cols])?;
        let part = g.f.matvec(&t)?;
        for (a, v) in y[g.row0..g.row0 + g.rows].iter_mut().zip(part) {
            *a += v;
        }
    }
    Ok(y)
}

/// Dense matrix represented by `h`.
pub fn hss_reconstruct(h: &HssMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(h.n, h.n);
    for (i, d) in h.diag.iter().enumerate() {
        out.set_block(i * h.leaf, i * h.leaf, d);
    }
    for g in &h.generators {
        if g.rank() > 0 {
            out.set_block(g.row0, g.col0, &g.f.matmul(&g.h).expect("generator pair is conformable"));
        }
    }
    out
}

/// ‖M − H‖ in the requested norm.
pub fn hss_error(h: &HssMatrix, m: &DenseMatrix, which: Norm) -> Result<f64> {
    if m.shape() != (h.n, h.n) {
        return dim_err("matrix does not match the HSS size");
    }
    norm(&m.sub(&hss_reconstruct(h))?, which)
}
