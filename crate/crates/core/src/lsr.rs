//! Sketch-and-solve least squares.
//!
//! The regression min ‖Ax − b‖ is rewritten as min ‖W y‖ over y = (x; −1)
//! with W = (A | b). A sketch F compresses W to the k×(d+1) matrix FW, and a
//! thin QR of FW gives both the sketched solution and its residual.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::linalg::{norm2, pseudo_inverse, solve_upper, thin_qr, DenseMatrix};
use crate::multipliers::{apply, SketchOperator, Side};

/// Relative threshold on the diagonal of R below which a column is treated as dependent.
const QR_RANK_TOL: f64 = 1e-12;

/// Overdetermined system Ax ≈ b with m > d ≥ 1.
#[derive(Debug)]
pub struct LsrProblem {
    a: DenseMatrix,
    b: Vec<f64>,
    min_residual: OnceLock<f64>,
}

impl Clone for LsrProblem {
    fn clone(&self) -> Self {
        LsrProblem { a: self.a.clone(), b: self.b.clone(), min_residual: self.min_residual.clone() }
    }
}

impl LsrProblem {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        let (m, d) = a.shape();
        if d == 0 || m <= d {
            return dim_err(format!("need m > d >= 1, got {m}x{d}"));
        }
        if b.len() != m {
            return dim_err(format!("b has length {}, expected {m}", b.len()));
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(LsrProblem { a, b, min_residual: OnceLock::new() })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    /// W = (A | b).
    pub fn augmented(&self) -> DenseMatrix {
        self.a.hstack(&DenseMatrix::column_vector(&self.b)).expect("b has m rows")
    }

    /// ‖Ax − b‖.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.matvec(x)?;
        Ok(norm2(&ax.iter().zip(&self.b).map(|(u, v)| u - v).collect::<Vec<_>>()))
    }

    /// min_x ‖Ax − b‖, computed once.
    pub fn min_residual(&self) -> f64 {
        *self.min_residual.get_or_init(|| {
            let x = solve_exact(self);
            self.residual(&x).expect("solution has d entries")
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsrReport {
    pub x_hat: Vec<f64>,
    pub sketched_residual: f64,
    pub true_residual: Option<f64>,
    pub ratio: Option<f64>,
    pub multiplier: String,
    pub k: usize,
    /// Number of sketches tried before this report was produced.
    pub attempts: usize,
    /// False when a retry loop ran out of attempts without passing validation.
    pub accepted: bool,
}

/// Solves min ‖(W)y‖ with the last coordinate of y fixed to −1, given W = (A | b).
/// Returns (x, residual) or the numerical rank of the A-part when it is deficient.
fn qr_solve(w: &DenseMatrix) -> std::result::Result<(Vec<f64>, f64), usize> {
    let d = w.cols() - 1;
    let (_, r) = thin_qr(w).expect("caller checks rows > cols");
    let scale = (0..d).map(|i| r.get(i, i).abs()).fold(0.0, f64::max);
    let rank = (0..d).filter(|&i| r.get(i, i).abs() > QR_RANK_TOL * scale && scale > 0.0).count();
    if rank < d {
        return Err(rank);
    }
    let r11 = r.block(0, 0, d, d);
    let r12: Vec<f64> = (0..d).map(|i| r.get(i, d)).collect();
    Ok((solve_upper(&r11, &r12), r.get(d, d).abs()))
}

/// Minimum-norm least-squares solution A⁺b.
pub fn solve_exact(p: &LsrProblem) -> Vec<f64> {
    if let Ok((x, _)) = qr_solve(&p.augmented()) {
        return x;
    }
    let pinv = pseudo_inverse(&p.a, 1e-12).expect("finite input");
    pinv.matvec(&p.b).expect("conformable")
}

/// ‖A x̂ − b‖ / min_x ‖Ax − b‖, or +∞ when the optimum is below 1e-14·‖b‖.
pub fn residual_ratio(p: &LsrProblem, x_hat: &[f64]) -> Result<f64> {
    let denom = p.min_residual();
    if denom < 1e-14 * norm2(&p.b) || denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p.residual(x_hat)? / denom)
}

/// Solves the sketched problem min ‖F(Ax − b)‖ with a k×m multiplier F, d < k ≤ m.
pub fn sketch_solve(p: &LsrProblem, f: &SketchOperator) -> Result<LsrReport> {
    let (k, m) = f.shape();
    let d = p.d();
    if m != p.m() {
        return dim_err(format!("multiplier has {m} columns, problem has {} rows", p.m()));
    }
    if k <= d || k > m {
        return arg_err(format!("need d < k <= m, got d={d}, k={k}, m={m}"));
    }
    let fw = apply(f, &p.augmented(), Side::Left)?;
    let (x_hat, sketched_residual) =
        qr_solve(&fw).map_err(|rank| Error::SketchRankFailure { rank, needed: d })?;
    let true_residual = p.residual(&x_hat)?;
    let ratio = residual_ratio(p, &x_hat)?;
    Ok(LsrReport {
        x_hat,
        sketched_residual,
        true_residual: Some(true_residual),
        ratio: Some(ratio),
        multiplier: f.label(),
        k,
        attempts: 1,
        accepted: true,
    })
}

/// Sketched residual of `x` under `g` against the best achievable under `g`.
fn validation_factor(p: &LsrProblem, g: &SketchOperator, x: &[f64]) -> Result<f64> {
    let gw = apply(g, &p.augmented(), Side::Left)?;
    let mut y = x.to_vec();
    y.push(-1.0);
    let achieved = norm2(&gw.matvec(&y)?);
    let best = qr_solve(&gw).map(|(_, res)| res).unwrap_or(0.0);
    let floor = 1e-14 * norm2(&gw.col(p.d()));
    let denom = best.max(floor);
    if denom == 0.0 {
        return Ok(if achieved == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(achieved / denom)
}

/// Sketch-and-solve with implicit pre-processing retries.
///
/// Attempt 0 uses `base`; attempt i ≥ 1 uses `base · Q_{i-1}`. Each solution is
/// checked on the independent sketch `validation`: it is accepted when its
/// residual there is within `accept_tol` of the optimum there. After
/// `max_retries` failed retries the best report so far is returned with
/// `accepted = false`.
pub fn solve_with_retries(
    p: &LsrProblem,
    base: &SketchOperator,
    q_family: &[SketchOperator],
    max_retries: usize,
    accept_tol: f64,
    validation: &SketchOperator,
) -> Result<LsrReport> {
    if accept_tol < 1.0 {
        return arg_err("accept_tol must be at least 1");
    }
    let tries = 1 + max_retries.min(q_family.len());
    let mut best: Option<(f64, LsrReport)> = None;
    for attempt in 0..tries {
        let f = if attempt == 0 {
            base.clone()
        } else {
            SketchOperator::product(vec![base.clone(), q_family[attempt - 1].clone()])?
        };
        let mut report = match sketch_solve(p, &f) {
            Ok(r) => r,
            Err(Error::SketchRankFailure { .. }) => continue,
            Err(e) => return Err(e),
        };
        report.attempts = attempt + 1;
        let factor = validation_factor(p, validation, &report.x_hat)?;
        if factor <= accept_tol {
            return Ok(report);
        }
        if best.as_ref().is_none_or(|(b, _)| factor < *b) {
            best = Some((factor, report));
        }
    }
    match best {
        Some((_, mut r)) => {
            r.accepted = false;
            r.attempts = tries;
            Ok(r)
        }
        None => Ok(LsrReport {
            x_hat: vec![0.0; p.d()],
            sketched_residual: f64::INFINITY,
            true_residual: Some(norm2(p.b())),
            ratio: Some(residual_ratio(p, &vec![0.0; p.d()])?),
            multiplier: base.label(),
            k: base.rows(),
            attempts: tries,
            accepted: false,
        }),
    }
}

/// Solves with each multiplier and keeps the report with the smallest true residual.
pub fn best_of(p: &LsrProblem, multipliers: &[SketchOperator]) -> Result<LsrReport> {
    let mut best: Option<LsrReport> = None;
    let mut last_err = None;
    for f in multipliers {
        match sketch_solve(p, f) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.true_residual < b.true_residual) {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some(mut r), _) => {
            r.attempts = multipliers.len();
            Ok(r)
        }
        (None, Some(e)) => Err(e),
        (None, None) => arg_err("best_of needs at least one multiplier"),
    }
}
