use super::matrix::DenseMatrix;
use crate::counters;
use crate::error::{dim_err, Result};

/// Householder reflectors produced while triangularizing a matrix in place.
struct Reflectors {
    /// (column, v, 2 / vᵀv); v starts at row `column`.
    items: Vec<(usize, Vec<f64>, f64)>,
}

/// Triangularizes `a` (row-major, m×n) in place using Householder reflections
/// with optional column pivoting. Returns the reflectors and the column order.
fn householder(a: &mut DenseMatrix, pivot: bool) -> (Reflectors, Vec<usize>) {
    let (m, n) = a.shape();
    let steps = m.min(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut items = Vec::with_capacity(steps);
    for j in 0..steps {
        if pivot {
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..n {
                let s: f64 = (j..m).map(|i| a.get(i, c).powi(2)).sum();
                if s > best_norm {
                    best_norm = s;
                    best = c;
                }
            }
            if best != j {
                for i in 0..m {
                    let row = a.row_mut(i);
                    row.swap(j, best);
                }
                perm.swap(j, best);
            }
        }
        let x: Vec<f64> = (j..m).map(|i| a.get(i, j)).collect();
        let xnorm = super::matrix::norm2(&x);
        if xnorm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        apply_reflector(a, j, &v, beta, j);
        items.push((j, v, beta));
    }
    (Reflectors { items }, perm)
}

/// Applies I − beta·v·vᵀ (acting on rows `start..`) to columns `col0..` of `a`.
fn apply_reflector(a: &mut DenseMatrix, start: usize, v: &[f64], beta: f64, col0: usize) {
    let n = a.cols();
    if col0 >= n {
        return;
    }
    let mut w = vec![0.0; n - col0];
    for (t, &vi) in v.iter().enumerate() {
        let row = &a.row(start + t)[col0..];
        for (wk, &r) in w.iter_mut().zip(row) {
            *wk += vi * r;
        }
    }
    for (t, &vi) in v.iter().enumerate() {
        let s = beta * vi;
        let row = &mut a.row_mut(start + t)[col0..];
        for (r, &wk) in row.iter_mut().zip(&w) {
            *r -= s * wk;
        }
    }
    counters::add_flops(4 * v.len() * (n - col0));
}

/// Forms the leading `k` columns of Q from the reflectors.
fn form_q(refl: &Reflectors, m: usize, k: usize) -> DenseMatrix {
    let mut q = DenseMatrix::eye(m, k);
    for (j, v, beta) in refl.items.iter().rev() {
        apply_reflector(&mut q, *j, v, *beta, 0);
    }
    q
}

fn upper(a: &DenseMatrix, k: usize) -> DenseMatrix {
    let n = a.cols();
    DenseMatrix::from_fn(k, n, |i, j| if j >= i { a.get(i, j) } else { 0.0 })
}

/// Flips signs so that the diagonal of R is nonnegative.
fn fix_signs(q: &mut DenseMatrix, r: &mut DenseMatrix) {
    let k = r.rows().min(r.cols());
    for i in 0..k {
        if r.get(i, i) < 0.0 {
            r.row_mut(i).iter_mut().for_each(|v| *v = -*v);
            for t in 0..q.rows() {
                let v = q.get(t, i);
                q.set(t, i, -v);
            }
        }
    }
}

/// Thin QR factorization A = QR of a matrix with at least as many rows as columns.
/// Q has orthonormal columns and R is upper triangular with R_ii ≥ 0.
pub fn thin_qr(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return dim_err(format!("thin_qr needs rows >= cols, got {m}x{n}"));
    }
    let mut work = a.clone();
    let (refl, _) = householder(&mut work, false);
    let mut q = form_q(&refl, m, n);
    let mut r = upper(&work, n);
    fix_signs(&mut q, &mut r);
    Ok((q, r))
}

/// QR with column pivoting: `A[:, perm] = Q·R`, with |R_11| ≥ |R_22| ≥ … .
/// Works for any shape; Q is m×min(m,n) and R is min(m,n)×n.
pub fn pivoted_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix, Vec<usize>) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut work = a.clone();
    let (refl, perm) = householder(&mut work, true);
    let mut q = form_q(&refl, m, k);
    let mut r = upper(&work, k);
    fix_signs(&mut q, &mut r);
    (q, r, perm)
}

/// Solves the upper-triangular system R x = b by back substitution.
pub fn solve_upper(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = r.cols();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= r.get(i, j) * x[j];
        }
        x[i] = s / r.get(i, i);
    }
    x
}
