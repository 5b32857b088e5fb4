//! Cross-approximation: alternate column and row selection on strips of M.

use serde::{Deserialize, Serialize};

use super::{maxvol_rect, primitive_cur, CurDecomposition};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{singular_values, svd, DenseMatrix, IndexSet, LowRankFactors, Tolerance};
use crate::lra::posterior_error_estimate;
use crate::rng::Rng;
use crate::source::EntrySource;

/// Relative level below which a strip singular value is treated as rounding noise.
const STRIP_RANK_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Columns chosen inside the current row strip.
    Vertical,
    /// Rows chosen inside the current column strip.
    Horizontal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaStep {
    pub direction: Direction,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Product of the r leading singular values of the generator M[𝓘, 𝓙].
    pub volume: f64,
    pub error_estimate: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaTrace {
    pub steps: Vec<CaStep>,
    pub loops_run: usize,
    pub stopped_early: bool,
}

/// Up to r leading singular vectors of a strip, dropping directions at rounding level.
fn strip_vectors(b: &DenseMatrix, r: usize) -> Result<(DenseMatrix, DenseMatrix)> {
    let d = svd(b)?;
    let rank = Tolerance::Relative(STRIP_RANK_TOL).rank_of(&d.sigma).min(r);
    if rank == 0 {
        return Err(Error::SelectionFailure("strip is numerically zero".into()));
    }
    Ok((d.s.leading_cols(rank), d.t.leading_cols(rank)))
}

fn volume(g: &DenseMatrix, r: usize) -> Result<f64> {
    Ok(singular_values(g)?.iter().take(r).product())
}

/// Cross-approximation iterations from `init_rows`.
///
/// Each loop picks l columns by maxvol on the top-r right singular vectors of
/// the row strip M[𝓘, :], then k rows from the top-r left singular vectors of
/// the column strip M[:, 𝓙]. A strip whose numerical rank is below r is
/// searched along its available directions only; the final generator must
/// still have rank r. With `stop_tol`, a 10×10 sampled error estimate
/// after each loop ends the iteration once it falls below the tolerance.
#[allow(clippy::too_many_arguments)]
pub fn cross_approx<S: EntrySource + ?Sized>(
    m: &S,
    r: usize,
    k: usize,
    l: usize,
    init_rows: &IndexSet,
    loops: usize,
    h: f64,
    stop_tol: Option<f64>,
    rng: &mut Rng,
) -> Result<(CurDecomposition, CaTrace)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if r == 0 || k < r || l < r || k > rows || l > cols {
        return arg_err(format!("need r <= k <= m and r <= l <= n, got r={r}, k={k}, l={l}"));
    }
    if loops == 0 {
        return arg_err("cross-approximation needs at least one loop");
    }
    if init_rows.len() != k || init_rows.bound() != rows {
        return arg_err(format!("init_rows must hold k = {k} rows of {rows}"));
    }
    let swaps = 4 * r;
    let mut trace = CaTrace::default();
    let fail = |trace: &CaTrace, e: Error| match e {
        Error::SelectionFailure(msg) => Error::SelectionFailure(format!(
            "{msg} (after {} cross-approximation steps)",
            trace.steps.len()
        )),
        other => other,
    };
    let mut i_set = init_rows.indices().to_vec();
    let mut j_set: Vec<usize> = Vec::new();
    for _ in 0..loops {
        let strip = m.row_strip(&i_set);
        let (_, t) = strip_vectors(&strip, r).map_err(|e| fail(&trace, e))?;
        j_set = maxvol_rect(&t, l, h, swaps).map_err(|e| fail(&trace, e))?.indices().to_vec();
        trace.steps.push(CaStep {
            direction: Direction::Vertical,
            rows: i_set.clone(),
            cols: j_set.clone(),
            volume: volume(&strip.select_cols(&j_set), r)?,
            error_estimate: None,
        });

        let strip = m.col_strip(&j_set);
        let (s, _) = strip_vectors(&strip, r).map_err(|e| fail(&trace, e))?;
        i_set = maxvol_rect(&s, k, h, swaps).map_err(|e| fail(&trace, e))?.indices().to_vec();
        let generator = strip.select_rows(&i_set);
        let mut step = CaStep {
            direction: Direction::Horizontal,
            rows: i_set.clone(),
            cols: j_set.clone(),
            volume: volume(&generator, r)?,
            error_estimate: None,
        };
        trace.loops_run += 1;
        if let Some(tol) = stop_tol {
            let cur = primitive_cur(m, &IndexSet::new(i_set.clone(), rows)?, &IndexSet::new(j_set.clone(), cols)?, r)?;
            let factors = LowRankFactors::new(strip.matmul(&cur.nucleus)?, m.row_strip(&i_set), r)?;
            let est = posterior_error_estimate(m, &factors, rows.min(10), cols.min(10), rng)?;
            step.error_estimate = Some(est.estimate_frobenius);
            trace.steps.push(step);
            if est.estimate_frobenius < tol {
                trace.stopped_early = trace.loops_run < loops;
                return Ok((cur, trace));
            }
        } else {
            trace.steps.push(step);
        }
    }
    let cur = primitive_cur(m, &IndexSet::new(i_set, rows)?, &IndexSet::new(j_set, cols)?, r)?;
    Ok((cur, trace))
}
