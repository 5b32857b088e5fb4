use num_complex::Complex64;

use super::matrix::DenseMatrix;
use crate::error::{dim_err, Result};

/// Row-major complex matrix. Only products and conversions are provided: the
/// complex path exists for the abridged Fourier operators.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err("entry count does not match shape");
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_real(m: &DenseMatrix) -> Self {
        ComplexMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut t = self.transpose();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn matmul(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != b.rows {
            return dim_err("complex matmul shape mismatch");
        }
        let mut out = Self::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self.data[i * self.cols + p];
                for j in 0..b.cols {
                    out.data[i * b.cols + j] += a * b.data[p * b.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}
