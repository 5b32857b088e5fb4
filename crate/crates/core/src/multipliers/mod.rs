//! Structured sketch operators applied without materialization.
//!
//! Every operator is an immutable value of [`SketchOperator`]. Randomized
//! constructors take an explicit [`Rng`] so that a seed reproduces the operator
//! bit for bit. Composite operators (`Sum`, `Product`, `ColumnSlice`) combine
//! the primitive kinds; the ASPH family, for instance, is `P · D · H_{n,d}`.

mod apply;
mod bidiag;
mod descriptor;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{self, Rng};

pub use apply::{apply, apply_complex, apply_rows, materialize, materialize_complex, materialize_with_cap, Side};
pub use bidiag::{
    bidiagonal_product_raw, gen_bidiagonal_product, ks_normality, BidiagonalFactor,
    BidiagonalProduct,
};
pub use descriptor::{Family, OperatorSpec};

/// Default size cap for [`materialize`].
pub const MATERIALIZE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Lower,
    Upper,
}

/// One step `P_i · R_i` of a Householder chain, `R_i = I − 2wwᵀ/(wᵀw)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HouseholderStep {
    pub perm: Vec<usize>,
    pub w: Vec<f64>,
}

/// Structured linear operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SketchOperator {
    /// `(P x)_i = x_{perm[i]}`.
    Permutation { perm: Vec<usize> },
    SignDiagonal { diag: Vec<f64> },
    /// Unscaled ±1 operator `H_{2^d} ⊗ I_{n/2^d}`.
    AbridgedHadamard { n: usize, depth: usize },
    /// Radix-2 decimation-in-frequency recursion truncated after `depth` levels.
    AbridgedFourier { n: usize, depth: usize },
    /// `Σ v_p Z_f^p` over the listed (p, v_p), where `Z_f` is the unit f-circulant shift.
    SparseCirculant { n: usize, f: f64, nonzeros: Vec<(usize, f64)> },
    /// Inverse of a unit bidiagonal matrix. For `Lower`, `entries[i-1]` sits at
    /// (i, i-1); for `Upper`, `entries[i]` sits at (i, i+1).
    InverseBidiagonal { entries: Vec<f64>, orientation: Orientation },
    /// `Π_i P_i R_i`, leftmost step first.
    HouseholderChain { n: usize, steps: Vec<HouseholderStep> },
    Gaussian { matrix: DenseMatrix },
    /// Row selector (`indices.len()` × `dim`), or its transpose when `as_columns`.
    SubIdentity { indices: Vec<usize>, dim: usize, as_columns: bool },
    Sum { terms: Vec<SketchOperator>, signs: Vec<f64> },
    /// `factors[0] · factors[1] · …`.
    Product { factors: Vec<SketchOperator> },
    /// Selected columns of `inner`.
    ColumnSlice { inner: Box<SketchOperator>, columns: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceMode {
    Leftmost,
    Random,
}

fn check_perm(perm: &[usize]) -> Result<()> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return arg_err("not a permutation");
        }
        seen[p] = true;
    }
    Ok(())
}

fn check_abridged(n: usize, depth: usize) -> Result<()> {
    if n == 0 || depth >= usize::BITS as usize || n % (1usize << depth) != 0 {
        return arg_err(format!("n = {n} is not a multiple of 2^{depth}"));
    }
    Ok(())
}

impl SketchOperator {
    pub fn permutation(perm: Vec<usize>) -> Result<Self> {
        check_perm(&perm)?;
        Ok(SketchOperator::Permutation { perm })
    }

    pub fn identity(n: usize) -> Self {
        SketchOperator::Permutation { perm: (0..n).collect() }
    }

    pub fn random_permutation(n: usize, rng: &mut Rng) -> Self {
        SketchOperator::Permutation { perm: rng::random_permutation(n, rng) }
    }

    pub fn sign_diagonal(diag: Vec<f64>) -> Result<Self> {
        if diag.iter().any(|d| !d.is_finite() || d.abs() < 1e-12) {
            return arg_err("diagonal entries must be finite and bounded away from zero");
        }
        Ok(SketchOperator::SignDiagonal { diag })
    }

    pub fn random_signs(n: usize, rng: &mut Rng) -> Self {
        SketchOperator::SignDiagonal { diag: rng::sign_vec(n, rng) }
    }

    /// Diagonal with entries drawn uniformly from {±1, ±2, ±3, ±4}.
    pub fn random_integer_diagonal(n: usize, rng: &mut Rng) -> Self {
        let diag = (0..n)
            .map(|_| (rng::index_below(4, rng) + 1) as f64 * rng::sign(rng))
            .collect();
        SketchOperator::SignDiagonal { diag }
    }

    pub fn abridged_hadamard(n: usize, depth: usize) -> Result<Self> {
        check_abridged(n, depth)?;
        Ok(SketchOperator::AbridgedHadamard { n, depth })
    }

    pub fn abridged_fourier(n: usize, depth: usize) -> Result<Self> {
        check_abridged(n, depth)?;
        Ok(SketchOperator::AbridgedFourier { n, depth })
    }

    /// `P · D · H_{n,d}` with random permutation and random signs.
    pub fn asph(n: usize, depth: usize, rng: &mut Rng) -> Result<Self> {
        let h = Self::abridged_hadamard(n, depth)?;
        let p = Self::random_permutation(n, rng);
        let d = Self::random_signs(n, rng);
        Ok(SketchOperator::Product { factors: vec![p, d, h] })
    }

    /// `P · D · F_{n,d}`.
    pub fn aspf(n: usize, depth: usize, rng: &mut Rng) -> Result<Self> {
        let f = Self::abridged_fourier(n, depth)?;
        let p = Self::random_permutation(n, rng);
        let d = Self::random_signs(n, rng);
        Ok(SketchOperator::Product { factors: vec![p, d, f] })
    }

    pub fn sparse_circulant(n: usize, f: f64, nonzeros: Vec<(usize, f64)>) -> Result<Self> {
        if f.abs() != 1.0 {
            return arg_err("f must be a unit scalar");
        }
        if nonzeros.is_empty() || nonzeros.len() > n {
            return arg_err(format!("need 1 <= s <= {n} nonzeros"));
        }
        let mut seen = vec![false; n];
        for &(p, _) in &nonzeros {
            if p >= n || seen[p] {
                return arg_err("circulant positions must be distinct and below n");
            }
            seen[p] = true;
        }
        Ok(SketchOperator::SparseCirculant { n, f, nonzeros })
    }

    /// f-circulant with `s` random positions holding random signs.
    pub fn random_sparse_circulant(n: usize, s: usize, f: f64, rng: &mut Rng) -> Result<Self> {
        if s == 0 || s > n {
            return arg_err(format!("need 1 <= s <= {n}"));
        }
        let mut pos = rng::random_subset(n, s, rng);
        pos.sort_unstable();
        let nonzeros = pos.into_iter().map(|p| (p, rng::sign(rng))).collect();
        Self::sparse_circulant(n, f, nonzeros)
    }

    pub fn inverse_bidiagonal(entries: Vec<f64>, orientation: Orientation) -> Self {
        SketchOperator::InverseBidiagonal { entries, orientation }
    }

    pub fn random_inverse_bidiagonal(n: usize, orientation: Orientation, rng: &mut Rng) -> Self {
        Self::inverse_bidiagonal(rng::sign_vec(n.saturating_sub(1), rng), orientation)
    }

    /// Sum of the inverses of a random lower and a random upper ±1 bidiagonal matrix.
    pub fn bidiagonal_pair(n: usize, rng: &mut Rng) -> Self {
        let lo = Self::random_inverse_bidiagonal(n, Orientation::Lower, rng);
        let up = Self::random_inverse_bidiagonal(n, Orientation::Upper, rng);
        SketchOperator::Sum { terms: vec![lo, up], signs: vec![1.0, 1.0] }
    }

    pub fn householder_chain(n: usize, steps: Vec<HouseholderStep>) -> Result<Self> {
        for s in &steps {
            if s.w.len() != n || s.perm.len() != n {
                return dim_err("householder step has the wrong length");
            }
            check_perm(&s.perm)?;
            if s.w.iter().all(|&v| v == 0.0) {
                return arg_err("zero reflector vector");
            }
        }
        Ok(SketchOperator::HouseholderChain { n, steps })
    }

    /// `q` steps with Gaussian reflector vectors and random permutations.
    pub fn random_householder_chain(n: usize, q: usize, rng: &mut Rng) -> Self {
        let steps = (0..q)
            .map(|_| {
                let w = rng::normal_vec(n, rng);
                let perm = rng::random_permutation(n, rng);
                HouseholderStep { perm, w }
            })
            .collect();
        SketchOperator::HouseholderChain { n, steps }
    }

    pub fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> Self {
        SketchOperator::Gaussian { matrix: rng::gaussian_matrix(rows, cols, rng) }
    }

    /// k×dim operator picking entries `indices` of a vector.
    pub fn select_rows(indices: Vec<usize>, dim: usize) -> Result<Self> {
        crate::linalg::IndexSet::new(indices.clone(), dim)?;
        Ok(SketchOperator::SubIdentity { indices, dim, as_columns: false })
    }

    /// dim×l operator whose columns are the unit vectors `e_{indices[t]}`.
    pub fn select_cols(dim: usize, indices: Vec<usize>) -> Result<Self> {
        crate::linalg::IndexSet::new(indices.clone(), dim)?;
        Ok(SketchOperator::SubIdentity { indices, dim, as_columns: true })
    }

    pub fn sum(terms: Vec<SketchOperator>, signs: Vec<f64>) -> Result<Self> {
        if terms.is_empty() || terms.len() != signs.len() {
            return arg_err("sum needs one sign per term");
        }
        let shape = terms[0].shape();
        if terms.iter().any(|t| t.shape() != shape) {
            return dim_err("sum terms differ in shape");
        }
        Ok(SketchOperator::Sum { terms, signs })
    }

    pub fn product(factors: Vec<SketchOperator>) -> Result<Self> {
        if factors.is_empty() {
            return arg_err("empty product");
        }
        for w in factors.windows(2) {
            if w[0].cols() != w[1].rows() {
                return dim_err(format!(
                    "product factors {}x{} and {}x{}",
                    w[0].rows(),
                    w[0].cols(),
                    w[1].rows(),
                    w[1].cols()
                ));
            }
        }
        Ok(SketchOperator::Product { factors })
    }

    /// Leading `k` rows of the operator.
    pub fn leading_rows(self, k: usize) -> Result<Self> {
        let dim = self.rows();
        let sel = Self::select_rows((0..k).collect(), dim)?;
        Self::product(vec![sel, self])
    }

    /// `k` random rows of the operator.
    pub fn random_rows(self, k: usize, rng: &mut Rng) -> Result<Self> {
        let dim = self.rows();
        if k > dim {
            return arg_err(format!("cannot take {k} of {dim} rows"));
        }
        let sel = Self::select_rows(rng::random_subset(dim, k, rng), dim)?;
        Self::product(vec![sel, self])
    }

    pub fn rows(&self) -> usize {
        self.shape().0
    }

    pub fn cols(&self) -> usize {
        self.shape().1
    }

    pub fn shape(&self) -> (usize, usize) {
        use SketchOperator::*;
        match self {
            Permutation { perm } => (perm.len(), perm.len()),
            SignDiagonal { diag } => (diag.len(), diag.len()),
            AbridgedHadamard { n, .. } | AbridgedFourier { n, .. } => (*n, *n),
            SparseCirculant { n, .. } | HouseholderChain { n, .. } => (*n, *n),
            InverseBidiagonal { entries, .. } => (entries.len() + 1, entries.len() + 1),
            Gaussian { matrix } => matrix.shape(),
            SubIdentity { indices, dim, as_columns } => {
                if *as_columns {
                    (*dim, indices.len())
                } else {
                    (indices.len(), *dim)
                }
            }
            Sum { terms, .. } => terms[0].shape(),
            Product { factors } => (factors[0].rows(), factors[factors.len() - 1].cols()),
            ColumnSlice { inner, columns } => (inner.rows(), columns.len()),
        }
    }

    pub fn is_complex(&self) -> bool {
        use SketchOperator::*;
        match self {
            AbridgedFourier { .. } => true,
            Sum { terms, .. } => terms.iter().any(|t| t.is_complex()),
            Product { factors } => factors.iter().any(|t| t.is_complex()),
            ColumnSlice { inner, .. } => inner.is_complex(),
            _ => false,
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        use SketchOperator::*;
        match self {
            Permutation { .. } => "permutation".into(),
            SignDiagonal { .. } => "diagonal".into(),
            AbridgedHadamard { depth, .. } => format!("{depth}-AH"),
            AbridgedFourier { depth, .. } => format!("{depth}-AF"),
            SparseCirculant { nonzeros, .. } => format!("circulant(s={})", nonzeros.len()),
            InverseBidiagonal { .. } => "inverse-bidiagonal".into(),
            HouseholderChain { steps, .. } => format!("householder(q={})", steps.len()),
            Gaussian { .. } => "gaussian".into(),
            SubIdentity { .. } => "sub-identity".into(),
            Sum { terms, .. } => {
                let parts: Vec<String> = terms.iter().map(|t| t.label()).collect();
                format!("sum[{}]", parts.join("+"))
            }
            Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|t| t.label()).collect();
                format!("product[{}]", parts.join("*"))
            }
            ColumnSlice { inner, columns } => format!("{}[:, {}]", inner.label(), columns.len()),
        }
    }
}

/// Slices `l` columns of `op`, leftmost or at random.
///
/// A slice of a permutation is returned directly as a column selector.
pub fn take_columns(op: SketchOperator, l: usize, mode: SliceMode, rng: &mut Rng) -> Result<SketchOperator> {
    let n = op.cols();
    if l > n {
        return arg_err(format!("cannot take {l} of {n} columns"));
    }
    let columns = match mode {
        SliceMode::Leftmost => (0..l).collect(),
        SliceMode::Random => rng::random_subset(n, l, rng),
    };
    if let SketchOperator::Permutation { perm } = &op {
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let indices = columns.iter().map(|&c| inv[c]).collect();
        return Ok(SketchOperator::SubIdentity { indices, dim: n, as_columns: true });
    }
    Ok(SketchOperator::ColumnSlice { inner: Box::new(op), columns })
}
