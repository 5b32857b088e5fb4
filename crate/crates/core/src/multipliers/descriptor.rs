use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{take_columns, SketchOperator, SliceMode};
use crate::error::{arg_err, Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Asph,
    Aspf,
    Ah,
    Af,
    Circulant,
    Bidiagonal,
    Householder,
    Identity,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gaussian" => Family::Gaussian,
            "asph" => Family::Asph,
            "aspf" => Family::Aspf,
            "ah" => Family::Ah,
            "af" => Family::Af,
            "circulant" => Family::Circulant,
            "bidiagonal" => Family::Bidiagonal,
            "householder" => Family::Householder,
            "identity" | "subidentity" => Family::Identity,
            other => return arg_err(format!("unknown multiplier family '{other}'")),
        })
    }
}

/// Replayable description of a random multiplier: family, size, parameters and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub family: Family,
    /// Order of the underlying square operator.
    pub n: usize,
    /// Recursion depth of the abridged kinds.
    #[serde(default)]
    pub depth: usize,
    /// Nonzeros of a circulant's first column; 0 means all n.
    #[serde(default)]
    pub sparsity: usize,
    /// Householder reflectors; defaults to half the number of kept rows.
    #[serde(default)]
    pub reflectors: Option<usize>,
    pub seed: u64,
    /// Keep this many random rows (a k×n sketch).
    #[serde(default)]
    pub rows: Option<usize>,
    /// Keep this many leftmost columns (an n×l sketch).
    #[serde(default)]
    pub cols: Option<usize>,
}

impl OperatorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        OperatorSpec {
            family,
            n,
            depth: 0,
            sparsity: 0,
            reflectors: None,
            seed,
            rows: None,
            cols: None,
        }
    }

    pub fn depth(mut self, d: usize) -> Self {
        self.depth = d;
        self
    }

    pub fn sparsity(mut self, s: usize) -> Self {
        self.sparsity = s;
        self
    }

    pub fn keep_rows(mut self, k: usize) -> Self {
        self.rows = Some(k);
        self
    }

    pub fn keep_cols(mut self, l: usize) -> Self {
        self.cols = Some(l);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Regenerates the operator; identical specs give identical operators.
    pub fn build(&self) -> Result<SketchOperator> {
        let n = self.n;
        let mut rng = rng::from_seed(self.seed);
        if self.family == Family::Gaussian {
            let r = self.rows.unwrap_or(n);
            let c = if self.rows.is_some() { n } else { self.cols.unwrap_or(n) };
            return Ok(SketchOperator::gaussian(r, c, &mut rng));
        }
        let base = match self.family {
            Family::Gaussian => unreachable!(),
            Family::Asph => SketchOperator::asph(n, self.depth, &mut rng)?,
            Family::Aspf => SketchOperator::aspf(n, self.depth, &mut rng)?,
            Family::Ah => SketchOperator::abridged_hadamard(n, self.depth)?,
            Family::Af => SketchOperator::abridged_fourier(n, self.depth)?,
            Family::Circulant => {
                let s = if self.sparsity == 0 { n } else { self.sparsity };
                SketchOperator::random_sparse_circulant(n, s, 1.0, &mut rng)?
            }
            Family::Bidiagonal => SketchOperator::bidiagonal_pair(n, &mut rng),
            Family::Householder => {
                let q = self
                    .reflectors
                    .unwrap_or_else(|| (self.rows.or(self.cols).unwrap_or(n) / 2).max(1));
                SketchOperator::random_householder_chain(n, q, &mut rng)
            }
            Family::Identity => SketchOperator::random_permutation(n, &mut rng),
        };
        let mut op = base;
        if let Some(k) = self.rows {
            op = op.random_rows(k, &mut rng)?;
        }
        if let Some(l) = self.cols {
            op = take_columns(op, l, SliceMode::Leftmost, &mut rng)?;
        }
        Ok(op)
    }
}
