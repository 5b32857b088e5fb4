//! CUR approximation M ≈ C·U·R with C = M[:, 𝓙], R = M[𝓘, :] and a nucleus U.

mod conversion;
mod cross;
mod maxvol;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{norm, pinv_from_svd, svd, DenseMatrix, IndexSet, Norm, Tolerance};
use crate::rng::{self, Rng};
use crate::source::EntrySource;

pub use conversion::{lra_to_top_svd, top_svd_to_cur, Selector};
pub use cross::{cross_approx, CaStep, CaTrace, Direction};
pub use maxvol::{maxvol_rect, maxvol_rows, t_qsh, DEFAULT_H};

/// Relative threshold below which a generator singular value counts as zero.
pub const GENERATOR_RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurDecomposition {
    pub row_set: IndexSet,
    pub col_set: IndexSet,
    /// l×k middle factor.
    pub nucleus: DenseMatrix,
    pub r: usize,
    /// Set when the nucleus is the cheaper unweighted pseudo-inverse form.
    #[serde(default)]
    pub alternative_nucleus: bool,
    /// Row and column re-scaling weights (D̄, D) of a sampled selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<(Vec<f64>, Vec<f64>)>,
}

impl CurDecomposition {
    pub fn new(row_set: IndexSet, col_set: IndexSet, nucleus: DenseMatrix, r: usize) -> Result<Self> {
        if nucleus.shape() != (col_set.len(), row_set.len()) {
            return dim_err(format!(
                "nucleus is {}x{}, expected {}x{}",
                nucleus.rows(),
                nucleus.cols(),
                col_set.len(),
                row_set.len()
            ));
        }
        if r == 0 || row_set.len() < r || col_set.len() < r {
            return arg_err(format!("need k, l >= r >= 1, got k={}, l={}, r={r}", row_set.len(), col_set.len()));
        }
        Ok(CurDecomposition { row_set, col_set, nucleus, r, alternative_nucleus: false, scaling: None })
    }

    pub fn k(&self) -> usize {
        self.row_set.len()
    }

    pub fn l(&self) -> usize {
        self.col_set.len()
    }

    pub fn c_factor<S: EntrySource + ?Sized>(&self, m: &S) -> DenseMatrix {
        m.col_strip(self.col_set.indices())
    }

    pub fn r_factor<S: EntrySource + ?Sized>(&self, m: &S) -> DenseMatrix {
        m.row_strip(self.row_set.indices())
    }

    /// Dense C·U·R.
    pub fn reconstruct<S: EntrySource + ?Sized>(&self, m: &S) -> Result<DenseMatrix> {
        self.check_shape(m)?;
        let cu = self.c_factor(m).matmul(&self.nucleus)?;
        cu.matmul(&self.r_factor(m))
    }

    fn check_shape<S: EntrySource + ?Sized>(&self, m: &S) -> Result<()> {
        if m.nrows() != self.row_set.bound() || m.ncols() != self.col_set.bound() {
            return dim_err(format!(
                "decomposition is for {}x{}, matrix is {}x{}",
                self.row_set.bound(),
                self.col_set.bound(),
                m.nrows(),
                m.ncols()
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decompositions serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Nucleus (G_r)⁺ of a generator, failing when rank(G) < r.
pub fn truncated_nucleus(g: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    let d = svd(g)?;
    let rank = Tolerance::Relative(GENERATOR_RANK_TOL).rank_of(&d.sigma);
    if rank < r {
        return Err(Error::GeneratorRankFailure { rank, target: r });
    }
    Ok(pinv_from_svd(&d, r))
}

/// CUR from given index sets; reads only the k×l generator.
pub fn primitive_cur<S: EntrySource + ?Sized>(
    m: &S,
    rows: &IndexSet,
    cols: &IndexSet,
    r: usize,
) -> Result<CurDecomposition> {
    if rows.bound() != m.nrows() || cols.bound() != m.ncols() {
        return dim_err("index sets do not match the matrix shape");
    }
    if r == 0 || rows.len() < r || cols.len() < r {
        return arg_err(format!("need k, l >= r >= 1, got k={}, l={}, r={r}", rows.len(), cols.len()));
    }
    let g = m.submatrix(rows.indices(), cols.indices());
    let nucleus = truncated_nucleus(&g, r)?;
    CurDecomposition::new(rows.clone(), cols.clone(), nucleus, r)
}

/// Top-r singular vectors of a block, or a selection failure when its rank is below r.
fn leading_vectors(b: &DenseMatrix, r: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let d = svd(b)?;
    let rank = Tolerance::Relative(GENERATOR_RANK_TOL).rank_of(&d.sigma);
    if rank < r {
        return Err(Error::SelectionFailure(format!("block has numerical rank {rank} < {r}")));
    }
    Ok((d.s.leading_cols(r), d.t.leading_cols(r)))
}

/// CUR from a random p×q sub-block: a k×l generator is picked inside the
/// block by maxvol on both factors of its rank-r SVD.
#[allow(clippy::too_many_arguments)]
pub fn cynical_cur<S: EntrySource + ?Sized>(
    m: &S,
    p: usize,
    q: usize,
    k: usize,
    l: usize,
    r: usize,
    rng: &mut Rng,
) -> Result<CurDecomposition> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if !(0 < r && r <= k && k <= p && p <= rows && r <= l && l <= q && q <= cols) {
        return arg_err(format!(
            "need 0 < r <= k <= p <= m and r <= l <= q <= n, got r={r}, k={k}, p={p}, m={rows}, l={l}, q={q}, n={cols}"
        ));
    }
    let block_rows = rng::random_subset(rows, p, rng);
    let block_cols = rng::random_subset(cols, q, rng);
    let block = m.submatrix(&block_rows, &block_cols);
    let (s, t) = leading_vectors(&block, r)?;
    let swaps = 4 * r;
    let pick_rows = maxvol_rect(&s, k, DEFAULT_H, swaps)?;
    let pick_cols = maxvol_rect(&t, l, DEFAULT_H, swaps)?;
    let i: Vec<usize> = pick_rows.indices().iter().map(|&a| block_rows[a]).collect();
    let j: Vec<usize> = pick_cols.indices().iter().map(|&b| block_cols[b]).collect();
    primitive_cur(m, &IndexSet::new(i, rows)?, &IndexSet::new(j, cols)?, r)
}

/// ‖M − CUR‖ in the requested norm.
pub fn cur_evaluate(m: &DenseMatrix, c: &CurDecomposition, which: Norm) -> Result<f64> {
    norm(&m.sub(&c.reconstruct(m)?)?, which)
}
