//! Products of random ±1 bidiagonal factors, which approach Gaussian matrices
//! as the number of factors grows, and a Kolmogorov–Smirnov normality check.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{self, Rng};

/// `B = C · P`: C has a unit diagonal, `sub[i-1]` at (i, i-1) and `corner` at
/// (0, n-1); P sends e_j to e_{perm[j]}.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagonalFactor {
    pub sub: Vec<f64>,
    pub corner: f64,
    pub perm: Vec<usize>,
}

impl BidiagonalFactor {
    pub fn random(n: usize, rng: &mut Rng) -> Self {
        let sub = rng::sign_vec(n - 1, rng);
        let corner = rng::sign(rng);
        let perm = rng::random_permutation(n, rng);
        BidiagonalFactor { sub, corner, perm }
    }

    /// `x ← B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut z = vec![0.0; n];
        for (j, &p) in self.perm.iter().enumerate() {
            z[p] = x[j];
        }
        let mut y = z.clone();
        if n > 1 {
            y[0] += self.corner * z[n - 1];
        }
        for i in 1..n {
            y[i] += self.sub[i - 1] * z[i - 1];
        }
        y
    }
}

/// `B_1 · B_2 ⋯ B_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct BidiagonalProduct {
    pub n: usize,
    pub factors: Vec<BidiagonalFactor>,
}

impl BidiagonalProduct {
    pub fn random(n: usize, t: usize, rng: &mut Rng) -> Self {
        let factors = (0..t).map(|_| BidiagonalFactor::random(n, rng)).collect();
        BidiagonalProduct { n, factors }
    }

    /// Column `j` of the raw product, in O(nT) operations.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        x[j] = 1.0;
        for f in self.factors.iter().rev() {
            x = f.apply(&x);
        }
        x
    }

    pub fn dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for (i, v) in self.column(j).into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// Entry (i, j) after standardizing column j to zero mean and unit variance.
    pub fn standardized_entry(&self, i: usize, j: usize) -> f64 {
        let mut c = self.column(j);
        standardize(&mut c);
        c[i]
    }
}

fn standardize(c: &mut [f64]) {
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in c.iter_mut() {
        *v -= mean;
        if sd > 0.0 {
            *v /= sd;
        }
    }
}

/// Raw n×n product of `t` random factors (identity when `t = 0`).
pub fn bidiagonal_product_raw(n: usize, t: usize, rng: &mut Rng) -> DenseMatrix {
    BidiagonalProduct::random(n, t, rng).dense()
}

/// Product of `t` random factors with every column standardized.
pub fn gen_bidiagonal_product(n: usize, t: usize, rng: &mut Rng) -> DenseMatrix {
    let p = BidiagonalProduct::random(n, t, rng);
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut c = p.column(j);
        standardize(&mut c);
        for (i, v) in c.into_iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

/// One-sample KS statistic of the standardized sample against N(0, 1).
/// Passes at α = 0.05 when the statistic is below 1.36/√N.
pub fn ks_normality(sample: &[f64]) -> Result<(f64, bool)> {
    let n = sample.len();
    if n < 30 {
        return Err(Error::DegenerateSample(format!("{n} values, need at least 30")));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let mut d: f64 = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        let f = phi.cdf(zi);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok((d, d < 1.36 / nf.sqrt()))
}
