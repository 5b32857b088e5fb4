use std::any::Any;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Orientation, SketchOperator, MATERIALIZE_CAP};
use crate::counters;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{ComplexMatrix, DenseMatrix};

/// Which side of the input the operator multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `op · M`
    Left,
    /// `M · op`
    Right,
}

pub(crate) trait Scalar:
    Copy
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
{
    fn zero() -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Row-major stack of `rows` vectors of length `width`; operators act on the
/// row index, so every primitive works on whole contiguous rows.
#[derive(Clone)]
struct Block<T> {
    rows: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> Block<T> {
    fn zeros(rows: usize, width: usize) -> Self {
        Block { rows, width, data: vec![T::zero(); rows * width] }
    }

    fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn row_mut(&mut self, i: usize) -> &mut [T] {
        let w = self.width;
        &mut self.data[i * w..(i + 1) * w]
    }

    fn select(&self, idx: &[usize]) -> Block<T> {
        let mut data = Vec::with_capacity(idx.len() * self.width);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Block { rows: idx.len(), width: self.width, data }
    }

    /// Two distinct rows, mutably.
    fn pair_mut(&mut self, i: usize, j: usize) -> (&mut [T], &mut [T]) {
        debug_assert!(i < j);
        let w = self.width;
        let (lo, hi) = self.data.split_at_mut(j * w);
        (&mut lo[i * w..(i + 1) * w], &mut hi[..w])
    }
}

fn axpy<T: Scalar>(y: &mut [T], a: f64, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += *xi * a;
    }
}

type Seq<'a> = Vec<(&'a SketchOperator, bool)>;

fn flatten<'a>(op: &'a SketchOperator, tr: bool, out: &mut Seq<'a>) {
    match op {
        SketchOperator::Product { factors } => {
            if tr {
                factors.iter().rev().for_each(|f| flatten(f, true, out));
            } else {
                factors.iter().for_each(|f| flatten(f, false, out));
            }
        }
        _ => out.push((op, tr)),
    }
}

/// (input dimension, output dimension) of `op` or its transpose.
fn io_dims(op: &SketchOperator, tr: bool) -> (usize, usize) {
    let (r, c) = op.shape();
    if tr {
        (r, c)
    } else {
        (c, r)
    }
}

fn apply_seq<T: Scalar>(seq: &[(&SketchOperator, bool)], mut x: Block<T>) -> Result<Block<T>> {
    for &(op, tr) in seq.iter().rev() {
        x = apply_one(op, tr, x)?;
    }
    Ok(x)
}

fn apply_one<T: Scalar>(op: &SketchOperator, tr: bool, x: Block<T>) -> Result<Block<T>> {
    use SketchOperator::*;
    let (din, dout) = io_dims(op, tr);
    if x.rows != din {
        return dim_err(format!(
            "operator {} ({}x{}{}) applied to {} rows",
            op.label(),
            op.rows(),
            op.cols(),
            if tr { ", transposed" } else { "" },
            x.rows
        ));
    }
    let w = x.width;
    match op {
        Permutation { perm } => {
            let mut y = Block::zeros(dout, w);
            for (i, &p) in perm.iter().enumerate() {
                if tr {
                    y.row_mut(p).copy_from_slice(x.row(i));
                } else {
                    y.row_mut(i).copy_from_slice(x.row(p));
                }
            }
            Ok(y)
        }
        SignDiagonal { diag } => {
            let mut y = x;
            for (i, &d) in diag.iter().enumerate() {
                y.row_mut(i).iter_mut().for_each(|v| *v = *v * d);
            }
            counters::add_flops(diag.len() * w);
            Ok(y)
        }
        AbridgedHadamard { n, depth } => {
            let mut y = x;
            for level in 0..*depth {
                let half = n >> (level + 1);
                for start in (0..*n).step_by(2 * half) {
                    for i in start..start + half {
                        let (a, b) = y.pair_mut(i, i + half);
                        for (p, q) in a.iter_mut().zip(b.iter_mut()) {
                            let (u, v) = (*p, *q);
                            *p = u + v;
                            *q = u - v;
                        }
                    }
                }
                counters::add_flops(n * w);
            }
            Ok(y)
        }
        AbridgedFourier { n, depth } => {
            let mut y = x;
            let z = (&mut y as &mut dyn Any)
                .downcast_mut::<Block<Complex64>>()
                .ok_or(Error::ComplexOperator)?;
            if tr {
                fourier_transposed(z, 0, *n, *depth);
            } else {
                fourier(z, 0, *n, *depth);
            }
            Ok(y)
        }
        SparseCirculant { n, f, nonzeros } => {
            let mut y = Block::zeros(*n, w);
            for j in 0..*n {
                let out = &mut y.data[j * w..(j + 1) * w];
                for &(p, v) in nonzeros {
                    let (src, c) = circulant_source(*n, *f, p, v, j, tr);
                    axpy(out, c, x.row(src));
                }
            }
            counters::add_flops((2 * nonzeros.len() - 1) * n * w);
            Ok(y)
        }
        InverseBidiagonal { entries, orientation } => {
            let lower = (*orientation == Orientation::Lower) != tr;
            let mut y = x;
            let n = entries.len() + 1;
            if lower {
                // (I + L) y = x, L strictly lower with entries[i-1] at (i, i-1)
                for i in 1..n {
                    let (prev, cur) = y.pair_mut(i - 1, i);
                    axpy(cur, -entries[i - 1], prev);
                }
            } else {
                for i in (0..n - 1).rev() {
                    let (cur, next) = y.pair_mut(i, i + 1);
                    axpy(cur, -entries[i], next);
                }
            }
            counters::add_flops(2 * (n - 1) * w);
            Ok(y)
        }
        HouseholderChain { n, steps } => {
            let mut y = x;
            let permute = |y: Block<T>, perm: &[usize], inverse: bool| {
                let mut z = Block::zeros(*n, w);
                for (i, &p) in perm.iter().enumerate() {
                    if inverse {
                        z.row_mut(p).copy_from_slice(y.row(i));
                    } else {
                        z.row_mut(i).copy_from_slice(y.row(p));
                    }
                }
                z
            };
            if tr {
                for st in steps {
                    y = permute(y, &st.perm, true);
                    reflect(&mut y, &st.w);
                }
            } else {
                for st in steps.iter().rev() {
                    reflect(&mut y, &st.w);
                    y = permute(y, &st.perm, false);
                }
            }
            Ok(y)
        }
        Gaussian { matrix } => {
            let mut y = Block::zeros(dout, w);
            for i in 0..matrix.rows() {
                for j in 0..matrix.cols() {
                    let g = matrix.get(i, j);
                    if tr {
                        axpy(y.row_mut(j), g, x.row(i));
                    } else {
                        axpy(y.row_mut(i), g, x.row(j));
                    }
                }
            }
            counters::add_flops(2 * matrix.rows() * matrix.cols() * w);
            Ok(y)
        }
        SubIdentity { indices, as_columns, .. } => {
            if *as_columns == tr {
                Ok(x.select(indices))
            } else {
                let mut y = Block::zeros(dout, w);
                for (t, &i) in indices.iter().enumerate() {
                    y.row_mut(i).copy_from_slice(x.row(t));
                }
                Ok(y)
            }
        }
        Sum { terms, signs } => {
            let mut acc = Block::zeros(dout, w);
            for (t, &s) in terms.iter().zip(signs) {
                let part = apply_one(t, tr, x.clone())?;
                axpy(&mut acc.data, s, &part.data);
            }
            Ok(acc)
        }
        Product { .. } => {
            let mut seq = Vec::new();
            flatten(op, tr, &mut seq);
            apply_seq(&seq, x)
        }
        ColumnSlice { inner, columns } => {
            if tr {
                Ok(apply_one(inner, true, x)?.select(columns))
            } else {
                let mut e = Block::zeros(inner.cols(), w);
                for (t, &c) in columns.iter().enumerate() {
                    e.row_mut(c).copy_from_slice(x.row(t));
                }
                apply_one(inner, false, e)
            }
        }
    }
}

/// Source row and coefficient of term (p, v) of an f-circulant for output row j.
fn circulant_source(n: usize, f: f64, p: usize, v: f64, j: usize, tr: bool) -> (usize, f64) {
    if tr {
        if j + p < n {
            (j + p, v)
        } else {
            (j + p - n, f * v)
        }
    } else if j >= p {
        (j - p, v)
    } else {
        (j + n - p, f * v)
    }
}

fn reflect<T: Scalar>(y: &mut Block<T>, wv: &[f64]) {
    let ww: f64 = wv.iter().map(|v| v * v).sum();
    let mut s = vec![T::zero(); y.width];
    for (j, &wj) in wv.iter().enumerate() {
        if wj != 0.0 {
            axpy(&mut s, wj, y.row(j));
        }
    }
    for (j, &wj) in wv.iter().enumerate() {
        if wj != 0.0 {
            axpy(y.row_mut(j), -2.0 * wj / ww, &s);
        }
    }
    counters::add_flops(4 * wv.len() * y.width);
}

fn twiddles(len: usize) -> Vec<Complex64> {
    (0..len / 2)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / len as f64))
        .collect()
}

/// `F_{len,depth}` applied to rows `start..start+len`:
/// butterfly, twiddle the lower half, recurse, then interleave the halves.
fn fourier(x: &mut Block<Complex64>, start: usize, len: usize, depth: usize) {
    if depth == 0 {
        return;
    }
    let s = len / 2;
    let tw = twiddles(len);
    for i in 0..s {
        let (a, b) = x.pair_mut(start + i, start + s + i);
        for (p, q) in a.iter_mut().zip(b.iter_mut()) {
            let (u, v) = (*p, *q);
            *p = u + v;
            *q = (u - v) * tw[i];
        }
    }
    counters::add_flops(3 * len * x.width);
    fourier(x, start, s, depth - 1);
    fourier(x, start + s, s, depth - 1);
    let w = x.width;
    let old = x.data[start * w..(start + len) * w].to_vec();
    for k in 0..s {
        x.row_mut(start + 2 * k).copy_from_slice(&old[k * w..(k + 1) * w]);
        x.row_mut(start + 2 * k + 1).copy_from_slice(&old[(s + k) * w..(s + k + 1) * w]);
    }
}

/// Transpose of [`fourier`]: de-interleave, recurse, twiddle, butterfly.
fn fourier_transposed(x: &mut Block<Complex64>, start: usize, len: usize, depth: usize) {
    if depth == 0 {
        return;
    }
    let s = len / 2;
    let w = x.width;
    let old = x.data[start * w..(start + len) * w].to_vec();
    for k in 0..s {
        x.row_mut(start + k).copy_from_slice(&old[2 * k * w..(2 * k + 1) * w]);
        x.row_mut(start + s + k).copy_from_slice(&old[(2 * k + 1) * w..(2 * k + 2) * w]);
    }
    fourier_transposed(x, start, s, depth - 1);
    fourier_transposed(x, start + s, s, depth - 1);
    let tw = twiddles(len);
    for i in 0..s {
        let (a, b) = x.pair_mut(start + i, start + s + i);
        for (p, q) in a.iter_mut().zip(b.iter_mut()) {
            let (u, v) = (*p, *q * tw[i]);
            *p = u + v;
            *q = u - v;
        }
    }
    counters::add_flops(3 * len * x.width);
}

/// Nonzeros of the selected output rows for kinds whose rows are explicitly sparse.
fn sparse_rows(op: &SketchOperator, tr: bool, idx: &[usize]) -> Option<Vec<Vec<(usize, f64)>>> {
    use SketchOperator::*;
    match op {
        Permutation { perm } => {
            if tr {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    inv[p] = i;
                }
                Some(idx.iter().map(|&i| vec![(inv[i], 1.0)]).collect())
            } else {
                Some(idx.iter().map(|&i| vec![(perm[i], 1.0)]).collect())
            }
        }
        SignDiagonal { diag } => Some(idx.iter().map(|&i| vec![(i, diag[i])]).collect()),
        SubIdentity { indices, dim, as_columns } => {
            if *as_columns == tr {
                Some(idx.iter().map(|&t| vec![(indices[t], 1.0)]).collect())
            } else {
                let mut pos = vec![usize::MAX; *dim];
                for (t, &i) in indices.iter().enumerate() {
                    pos[i] = t;
                }
                Some(
                    idx.iter()
                        .map(|&i| if pos[i] == usize::MAX { vec![] } else { vec![(pos[i], 1.0)] })
                        .collect(),
                )
            }
        }
        AbridgedHadamard { n, depth } => {
            let s0 = n >> depth;
            let blocks = 1usize << depth;
            Some(
                idx.iter()
                    .map(|&i| {
                        let (a, b) = (i / s0, i % s0);
                        (0..blocks)
                            .map(|c| {
                                let sign = if (a & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                                (c * s0 + b, sign)
                            })
                            .collect()
                    })
                    .collect(),
            )
        }
        SparseCirculant { n, f, nonzeros } => Some(
            idx.iter()
                .map(|&j| {
                    nonzeros
                        .iter()
                        .map(|&(p, v)| circulant_source(*n, *f, p, v, j, tr))
                        .collect()
                })
                .collect(),
        ),
        _ => None,
    }
}

fn unit_sparse(op: &SketchOperator) -> bool {
    matches!(
        op,
        SketchOperator::Permutation { .. }
            | SketchOperator::SignDiagonal { .. }
            | SketchOperator::SubIdentity { .. }
    )
}

/// Selected output rows of `seq[0] · seq[1] · … · x`, touching only the rows
/// of `x` that can contribute when the leading factors are sparse.
fn rows_of_seq<T: Scalar>(
    seq: &[(&SketchOperator, bool)],
    idx: &[usize],
    x: &Block<T>,
) -> Result<Block<T>> {
    let Some(&(f0, tr0)) = seq.first() else {
        return Ok(x.select(idx));
    };
    let rest = &seq[1..];
    let (din, dout) = io_dims(f0, tr0);
    if let Some(&bad) = idx.iter().find(|&&i| i >= dout) {
        return dim_err(format!("row {bad} requested from an operator with {dout} rows"));
    }
    if let SketchOperator::Product { .. } = f0 {
        let mut flat = Vec::new();
        flatten(f0, tr0, &mut flat);
        flat.extend_from_slice(rest);
        return rows_of_seq(&flat, idx, x);
    }
    if let (SketchOperator::ColumnSlice { inner, columns }, true) = (f0, tr0) {
        let mapped: Vec<usize> = idx.iter().map(|&t| columns[t]).collect();
        let mut s: Seq = vec![(inner.as_ref(), true)];
        s.extend_from_slice(rest);
        return rows_of_seq(&s, &mapped, x);
    }
    let full = idx.len() == dout && idx.iter().enumerate().all(|(a, &b)| a == b);
    if !full || unit_sparse(f0) {
        if let Some(sup) = sparse_rows(f0, tr0, idx) {
            let mut pos = vec![usize::MAX; din];
            let mut needed = Vec::new();
            for row in &sup {
                for &(c, _) in row {
                    if pos[c] == usize::MAX {
                        pos[c] = 0;
                        needed.push(c);
                    }
                }
            }
            needed.sort_unstable();
            for (t, &c) in needed.iter().enumerate() {
                pos[c] = t;
            }
            let z = rows_of_seq(rest, &needed, x)?;
            let mut y = Block::zeros(idx.len(), z.width);
            let mut work = 0;
            for (t, row) in sup.iter().enumerate() {
                let out = y.row_mut(t);
                for &(c, v) in row {
                    axpy(out, v, z.row(pos[c]));
                }
                // a plain row copy is free; scaling or summing costs per entry
                work += match row.as_slice() {
                    [] => 0,
                    [(_, v)] if *v == 1.0 => 0,
                    [_] => 1,
                    _ => 2 * row.len() - 1,
                };
            }
            counters::add_flops(work * z.width);
            return Ok(y);
        }
    }
    let y = apply_seq(rest, x.clone())?;
    if let (SketchOperator::Gaussian { matrix }, false) = (f0, tr0) {
        if y.rows != din {
            return dim_err("gaussian factor applied to the wrong number of rows");
        }
        let mut out = Block::zeros(idx.len(), y.width);
        for (t, &i) in idx.iter().enumerate() {
            let o = out.row_mut(t);
            for (j, &g) in matrix.row(i).iter().enumerate() {
                axpy(o, g, y.row(j));
            }
        }
        counters::add_flops(2 * idx.len() * din * y.width);
        return Ok(out);
    }
    let z = apply_one(f0, tr0, y)?;
    Ok(if full { z } else { z.select(idx) })
}

fn block_from_real(m: &DenseMatrix) -> Block<f64> {
    Block { rows: m.rows(), width: m.cols(), data: m.data().to_vec() }
}

fn run<T: Scalar>(op: &SketchOperator, tr: bool, x: Block<T>) -> Result<Block<T>> {
    let seq: Seq = vec![(op, tr)];
    let (_, dout) = io_dims(op, tr);
    let all: Vec<usize> = (0..dout).collect();
    rows_of_seq(&seq, &all, &x)
}

/// `op · M` (left) or `M · op` (right) without materializing `op`.
pub fn apply(op: &SketchOperator, m: &DenseMatrix, side: Side) -> Result<DenseMatrix> {
    if op.is_complex() {
        return Err(Error::ComplexOperator);
    }
    match side {
        Side::Left => {
            let y = run(op, false, block_from_real(m))?;
            Ok(DenseMatrix::from_vec_unchecked(y.rows, y.width, y.data))
        }
        Side::Right => {
            let y = run(op, true, block_from_real(&m.transpose()))?;
            Ok(DenseMatrix::from_vec_unchecked(y.rows, y.width, y.data).transpose())
        }
    }
}

/// Selected rows of `op · M`, reading only the rows of `M` that contribute
/// when the leading factors of `op` are sparse.
pub fn apply_rows(op: &SketchOperator, rows: &[usize], m: &DenseMatrix) -> Result<DenseMatrix> {
    if op.is_complex() {
        return Err(Error::ComplexOperator);
    }
    let seq: Seq = vec![(op, false)];
    let y = rows_of_seq(&seq, rows, &block_from_real(m))?;
    Ok(DenseMatrix::from_vec_unchecked(y.rows, y.width, y.data))
}

/// Complex counterpart of [`apply`]; accepts every kind.
pub fn apply_complex(op: &SketchOperator, m: &ComplexMatrix, side: Side) -> Result<ComplexMatrix> {
    let (input, tr) = match side {
        Side::Left => (m.clone(), false),
        Side::Right => (m.transpose(), true),
    };
    let x = Block { rows: input.rows(), width: input.cols(), data: input.into_data() };
    let y = run(op, tr, x)?;
    let out = ComplexMatrix::new(y.rows, y.width, y.data)?;
    Ok(match side {
        Side::Left => out,
        Side::Right => out.transpose(),
    })
}

/// Dense equivalent of a real operator, capped at [`MATERIALIZE_CAP`].
pub fn materialize(op: &SketchOperator) -> Result<DenseMatrix> {
    materialize_with_cap(op, MATERIALIZE_CAP)
}

pub fn materialize_with_cap(op: &SketchOperator, cap: usize) -> Result<DenseMatrix> {
    let (r, c) = op.shape();
    if r.max(c) > cap {
        return Err(Error::CapExceeded { rows: r, cols: c, cap });
    }
    apply(op, &DenseMatrix::identity(c), Side::Left)
}

pub fn materialize_complex(op: &SketchOperator) -> Result<ComplexMatrix> {
    let (r, c) = op.shape();
    if r.max(c) > MATERIALIZE_CAP {
        return Err(Error::CapExceeded { rows: r, cols: c, cap: MATERIALIZE_CAP });
    }
    apply_complex(op, &ComplexMatrix::from_real(&DenseMatrix::identity(c)), Side::Left)
}
