//! Entry-level access to a matrix. Sublinear algorithms read their input
//! through [`EntrySource`] so that the number of entries touched can be counted.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::linalg::DenseMatrix;

pub trait EntrySource: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> f64;

    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self.entry(i, j));
            }
        }
        DenseMatrix::from_vec_unchecked(rows.len(), cols.len(), data)
    }

    /// Full rows `M[rows, :]`.
    fn row_strip(&self, rows: &[usize]) -> DenseMatrix {
        let cols: Vec<usize> = (0..self.ncols()).collect();
        self.submatrix(rows, &cols)
    }

    /// Full columns `M[:, cols]`.
    fn col_strip(&self, cols: &[usize]) -> DenseMatrix {
        let rows: Vec<usize> = (0..self.nrows()).collect();
        self.submatrix(&rows, cols)
    }

    /// Reads every entry.
    fn to_dense(&self) -> DenseMatrix {
        let rows: Vec<usize> = (0..self.nrows()).collect();
        let cols: Vec<usize> = (0..self.ncols()).collect();
        self.submatrix(&rows, &cols)
    }
}

impl EntrySource for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        DenseMatrix::submatrix(self, rows, cols)
    }
    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

impl<S: EntrySource + ?Sized> EntrySource for &S {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        (**self).entry(i, j)
    }
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        (**self).submatrix(rows, cols)
    }
}

/// Implicit matrix given by a closure `(i, j) -> value`.
pub struct FnSource<F> {
    rows: usize,
    cols: usize,
    f: F,
}

impl<F: Fn(usize, usize) -> f64 + Sync> FnSource<F> {
    pub fn new(rows: usize, cols: usize, f: F) -> Self {
        FnSource { rows, cols, f }
    }
}

impl<F: Fn(usize, usize) -> f64 + Sync> EntrySource for FnSource<F> {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        (self.f)(i, j)
    }
}

/// Wraps a source and counts every entry read.
pub struct Counting<S> {
    inner: S,
    reads: AtomicU64,
}

impl<S: EntrySource> Counting<S> {
    pub fn new(inner: S) -> Self {
        Counting { inner, reads: AtomicU64::new(0) }
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.reads.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }
}

impl<S: EntrySource> EntrySource for Counting<S> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.inner.entry(i, j)
    }
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        self.reads.fetch_add((rows.len() * cols.len()) as u64, Ordering::Relaxed);
        self.inner.submatrix(rows, cols)
    }
}

/// Contiguous block of another source.
pub struct BlockView<'a, S: ?Sized> {
    inner: &'a S,
    r0: usize,
    c0: usize,
    rows: usize,
    cols: usize,
}

impl<'a, S: EntrySource + ?Sized> BlockView<'a, S> {
    pub fn new(inner: &'a S, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= inner.nrows() && c0 + cols <= inner.ncols());
        BlockView { inner, r0, c0, rows, cols }
    }
}

impl<S: EntrySource + ?Sized> EntrySource for BlockView<'_, S> {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner.entry(self.r0 + i, self.c0 + j)
    }
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let r: Vec<usize> = rows.iter().map(|i| i + self.r0).collect();
        let c: Vec<usize> = cols.iter().map(|j| j + self.c0).collect();
        self.inner.submatrix(&r, &c)
    }
}

/// Remembers every entry read from `inner`, so repeated reads of the same
/// position reach the underlying source once.
pub struct Memo<S> {
    inner: S,
    seen: Mutex<HashMap<(usize, usize), f64>>,
}

impl<S: EntrySource> Memo<S> {
    pub fn new(inner: S) -> Self {
        Memo { inner, seen: Mutex::new(HashMap::new()) }
    }

    /// Number of distinct entries read so far.
    pub fn distinct(&self) -> usize {
        self.seen.lock().expect("memo lock").len()
    }
}

impl<S: EntrySource> EntrySource for Memo<S> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn entry(&self, i: usize, j: usize) -> f64 {
        let mut seen = self.seen.lock().expect("memo lock");
        *seen.entry((i, j)).or_insert_with(|| self.inner.entry(i, j))
    }
    fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let mut seen = self.seen.lock().expect("memo lock");
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(*seen.entry((i, j)).or_insert_with(|| self.inner.entry(i, j)));
            }
        }
        DenseMatrix::from_vec_unchecked(rows.len(), cols.len(), data)
    }
}
