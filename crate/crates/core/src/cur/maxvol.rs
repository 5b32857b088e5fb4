//! Volume-maximizing row selection.

use crate::counters;
use crate::error::{arg_err, Error, Result};
use crate::linalg::{pivoted_qr, pseudo_inverse, svd, DenseMatrix, IndexSet};

/// Default dominance parameter, a little above 1.
pub const DEFAULT_H: f64 = 1.1;

/// t_{q,s,h} = √((q − s)·s·h² + 1).
pub fn t_qsh(q: usize, s: usize, h: f64) -> f64 {
    (q.saturating_sub(s) as f64 * s as f64 * h * h + 1.0).sqrt()
}

/// Solves X·Â = A for X, i.e. returns A·Â⁻¹ (or None when Â is numerically singular).
fn dominance(a: &DenseMatrix, rows: &[usize]) -> Option<DenseMatrix> {
    let sub = a.select_rows(rows);
    let d = svd(&sub).ok()?;
    let r = a.cols();
    let smin = d.sigma.get(r - 1).copied().unwrap_or(0.0);
    if !(smin > 1e-13 * d.sigma[0]) || d.sigma[0] == 0.0 {
        return None;
    }
    let inv = crate::linalg::pinv_from_svd(&d, r);
    a.matmul(&inv).ok()
}

/// Classic maxvol swap iteration on an m×r matrix of numerical rank r.
///
/// Starts from the rows chosen by pivoted QR of Aᵀ and swaps while some entry
/// of A·Â⁻¹ exceeds `h` in magnitude. Fails when the start block is singular
/// or when `max_swaps` swaps do not reach h-dominance.
pub fn maxvol_rows(a: &DenseMatrix, h: f64, max_swaps: usize) -> Result<IndexSet> {
    let (m, r) = a.shape();
    if r == 0 || r > m {
        return arg_err(format!("maxvol needs 1 <= r <= m, got {m}x{r}"));
    }
    if h < 1.0 {
        return arg_err("dominance parameter h must be at least 1");
    }
    let (_, _, perm) = pivoted_qr(&a.transpose());
    let mut rows: Vec<usize> = perm[..r].to_vec();
    let mut swaps = 0;
    loop {
        let b = dominance(a, &rows)
            .ok_or_else(|| Error::SelectionFailure("pivot block is numerically singular".into()))?;
        counters::add_flops(2 * m * r * r);
        let (mut bi, mut bj, mut best) = (0, 0, 0.0);
        for i in 0..m {
            for (j, v) in b.row(i).iter().enumerate() {
                if v.abs() > best {
                    (bi, bj, best) = (i, j, v.abs());
                }
            }
        }
        if best <= h {
            return IndexSet::new(rows, m);
        }
        if swaps == max_swaps {
            return Err(Error::SelectionFailure(format!(
                "dominance {best:.3} > h = {h} after {max_swaps} swaps"
            )));
        }
        rows[bj] = bi;
        swaps += 1;
    }
}

/// Selects k ≥ r rows: maxvol for the first r, then greedily the rows with the
/// largest norm in A·Â⁺ for the current selection Â.
pub fn maxvol_rect(a: &DenseMatrix, k: usize, h: f64, max_swaps: usize) -> Result<IndexSet> {
    let (m, r) = a.shape();
    if k < r || k > m {
        return arg_err(format!("need r <= k <= m, got r={r}, k={k}, m={m}"));
    }
    let mut rows = maxvol_rows(a, h, max_swaps)?.indices().to_vec();
    let mut chosen = vec![false; m];
    for &i in &rows {
        chosen[i] = true;
    }
    while rows.len() < k {
        let pinv = pseudo_inverse(&a.select_rows(&rows), 1e-13)?;
        let b = a.matmul(&pinv)?;
        let next = (0..m)
            .filter(|&i| !chosen[i])
            .max_by(|&x, &y| {
                let nx: f64 = b.row(x).iter().map(|v| v * v).sum();
                let ny: f64 = b.row(y).iter().map(|v| v * v).sum();
                nx.total_cmp(&ny).then(y.cmp(&x))
            })
            .expect("k <= m leaves a candidate");
        chosen[next] = true;
        rows.push(next);
    }
    IndexSet::new(rows, m)
}
