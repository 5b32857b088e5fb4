//! Input generators for the benchmarks and tests, plus MatrixMarket I/O.

mod market;
mod spec;

use std::f64::consts::PI;
use std::str::FromStr;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::linalg::{spectral_norm, svd, thin_qr, DenseMatrix, Tolerance};
use crate::lsr::LsrProblem;
use crate::rng::{self, Rng};

pub use market::{parse_matrix_market, read_matrix_market, to_matrix_market, write_matrix_market};
pub use spec::InputSpec;

/// Singular value used for the tail of [`gen_svd_profile`].
pub const PROFILE_TAIL: f64 = 1e-10;

/// Q factor of an n×n Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> DenseMatrix {
    thin_qr(&rng::gaussian_matrix(n, n, rng)).expect("square").0
}

/// S · diag(1, 1/2, …, 1/r, 1e-10, …) · Tᵀ with random orthogonal S, T.
pub fn gen_svd_profile(n: usize, r: usize, rng: &mut Rng) -> Result<DenseMatrix> {
    if r == 0 || r >= n {
        return arg_err(format!("need 1 <= r < n, got r={r}, n={n}"));
    }
    let s = random_orthogonal(n, rng);
    let t = random_orthogonal(n, rng);
    let profile: Vec<f64> = (1..=n).map(|j| if j <= r { 1.0 / j as f64 } else { PROFILE_TAIL }).collect();
    s.scale_cols(&profile).matmul(&t.transpose())
}

/// G₁·G₂ + noise·G₃ with Gaussian G₁ (m×r), G₂ (r×n), G₃ (m×n).
pub fn gen_factor_gaussian(m: usize, n: usize, r: usize, noise: f64, rng: &mut Rng) -> Result<DenseMatrix> {
    if r == 0 || r > m.min(n) {
        return arg_err(format!("rank {r} outside 1..={}", m.min(n)));
    }
    let g1 = rng::gaussian_matrix(m, r, rng);
    let g2 = rng::gaussian_matrix(r, n, rng);
    let w = g1.matmul(&g2)?;
    if noise == 0.0 {
        return Ok(w);
    }
    w.add(&rng::gaussian_matrix(m, n, rng).scaled(noise))
}

/// Log potential on the unit circle observed on the circle of radius 2.
///
/// Entry (i, j) integrates log|2ωⁱ − y| over the j-th of n equal arcs of the
/// unit circle (ω = e^{2πi/n}); the result is scaled to unit spectral norm.
pub fn gen_laplacian(n: usize) -> Result<DenseMatrix> {
    if n < 4 {
        return arg_err("laplacian needs n >= 4");
    }
    let h = 2.0 * PI / n as f64;
    let integrand = |i: usize| {
        let phi = i as f64 * h;
        let (xs, xc) = (2.0 * phi.sin(), 2.0 * phi.cos());
        move |theta: f64| {
            let (dx, dy) = (xc - theta.cos(), xs - theta.sin());
            0.5 * (dx * dx + dy * dy).ln()
        }
    };
    let entry = |rule: &GaussLegendre, i: usize, j: usize| {
        rule.integrate(j as f64 * h, (j + 1) as f64 * h, integrand(i))
    };
    let mut deg = 32;
    let mut rule = GaussLegendre::new(deg).expect("degree >= 2");
    loop {
        let finer = GaussLegendre::new(2 * deg).expect("degree >= 2");
        let change = (0..n).map(|j| (entry(&rule, 0, j) - entry(&finer, 0, j)).abs()).fold(0.0, f64::max);
        rule = finer;
        deg *= 2;
        if change < 1e-12 || deg >= 1024 {
            break;
        }
    }
    // rotation symmetry: m_{i,j} depends on (j − i) mod n
    let first: Vec<f64> = (0..n).map(|j| entry(&rule, 0, j)).collect();
    let m = DenseMatrix::from_fn(n, n, |i, j| first[(j + n - i) % n]);
    let norm = spectral_norm(&m)?;
    Ok(m.scaled(1.0 / norm))
}

/// Five-point Dirichlet Laplacian on an N×N grid (order N²).
pub fn fd_operator(grid: usize) -> DenseMatrix {
    let n = grid * grid;
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..grid {
        for j in 0..grid {
            let k = i * grid + j;
            a.set(k, k, 4.0);
            if i > 0 {
                a.set(k, k - grid, -1.0);
            }
            if i + 1 < grid {
                a.set(k, k + grid, -1.0);
            }
            if j > 0 {
                a.set(k, k - 1, -1.0);
            }
            if j + 1 < grid {
                a.set(k, k + 1, -1.0);
            }
        }
    }
    a
}

/// Grid side used by [`gen_fd_inverse`] for an m×n block.
pub fn fd_grid_size(m: usize, n: usize) -> usize {
    (2.5 * (m + n) as f64).sqrt().ceil() as usize
}

/// Off-diagonal m×n block of the inverse of the five-point Laplacian:
/// the first m grid nodes against the last n, with a gap between them.
pub fn gen_fd_inverse(m: usize, n: usize) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return arg_err("empty block");
    }
    let grid = fd_grid_size(m, n);
    let total = grid * grid;
    let inv = crate::linalg::pseudo_inverse(&fd_operator(grid), 1e-14)?;
    Ok(inv.block(0, total - n, m, n))
}

/// Right-hand side families for least-squares benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LsrFamily {
    Gaussian,
    Illcond,
    Semicoherent,
    Coherent,
}

impl FromStr for LsrFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(LsrFamily::Gaussian),
            "illcond" => Ok(LsrFamily::Illcond),
            "semicoherent" => Ok(LsrFamily::Semicoherent),
            "coherent" => Ok(LsrFamily::Coherent),
            _ => arg_err(format!("unknown LSR family {s}")),
        }
    }
}

/// Least-squares problem of the given family with b = A·x₀ + 0.01·g.
pub fn gen_lsr_family(family: LsrFamily, m: usize, n: usize, rng: &mut Rng) -> Result<LsrProblem> {
    if m <= n || n == 0 {
        return arg_err(format!("need m > n >= 1, got {m}x{n}"));
    }
    let a = match family {
        LsrFamily::Gaussian => rng::gaussian_matrix(m, n, rng),
        LsrFamily::Illcond => {
            let s = thin_qr(&rng::gaussian_matrix(m, n, rng))?.0;
            let t = random_orthogonal(n, rng);
            let sigma: Vec<f64> =
                (0..n).map(|j| if j < 14 { 10f64.powi(4 - j as i32) } else { 1e-10 }).collect();
            s.scale_cols(&sigma).matmul(&t.transpose())?
        }
        LsrFamily::Semicoherent => {
            let h = n / 2;
            let g = rng::gaussian_matrix(m - (n - h), h, rng);
            let d = rng::sign_vec(n - h, rng);
            let mut a = DenseMatrix::zeros(m, n);
            a.set_block(0, 0, &g);
            for (t, v) in d.iter().enumerate() {
                a.set(m - (n - h) + t, h + t, *v);
            }
            a
        }
        LsrFamily::Coherent => {
            let d = rng::sign_vec(n, rng);
            DenseMatrix::eye(m, n).scale_cols(&d)
        }
    };
    let x0 = rng::normal_vec(n, rng);
    let noise = rng::normal_vec(m, rng);
    let b: Vec<f64> = a.matvec(&x0)?.iter().zip(&noise).map(|(u, e)| u + 0.01 * e).collect();
    LsrProblem::new(a, b)
}

/// Maximum squared row norm of the left singular factor (restricted to the numerical rank).
pub fn coherence(a: &DenseMatrix) -> Result<f64> {
    if a.rows() < a.cols() {
        return arg_err("coherence needs m >= n");
    }
    let d = svd(a)?;
    let rank = Tolerance::Relative(1e-12).rank_of(&d.sigma);
    let s = d.s.leading_cols(rank);
    Ok(s.row_norms_sq().into_iter().fold(0.0, f64::max))
}

pub fn gen_delta(m: usize, n: usize, i: usize, j: usize) -> Result<DenseMatrix> {
    if i >= m || j >= n {
        return arg_err(format!("({i}, {j}) outside {m}x{n}"));
    }
    let mut d = DenseMatrix::zeros(m, n);
    d.set(i, j, 1.0);
    Ok(d)
}

/// δ-matrix minus the all-½ matrix.
pub fn gen_shifted_delta(m: usize, n: usize, i: usize, j: usize) -> Result<DenseMatrix> {
    let d = gen_delta(m, n, i, j)?;
    Ok(DenseMatrix::from_fn(m, n, |a, b| d.get(a, b) - 0.5))
}

/// Smooth kernels discretized at midpoints of [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// (1 + (x − y)²)^{-3/2}
    Gravity,
    /// sinc²(5(x − y))
    Shaw,
    /// 1 / (x + y + 1)
    Hilbert,
}

impl FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gravity" => Ok(Kernel::Gravity),
            "shaw" => Ok(Kernel::Shaw),
            "hilbert" => Ok(Kernel::Hilbert),
            _ => arg_err(format!("unknown kernel {s}")),
        }
    }
}

pub fn gen_kernel(kernel: Kernel, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |i, j| {
        let x = (i as f64 + 0.5) / m as f64;
        let y = (j as f64 + 0.5) / n as f64;
        match kernel {
            Kernel::Gravity => (1.0 + (x - y).powi(2)).powf(-1.5),
            Kernel::Shaw => {
                let u = 5.0 * PI * (x - y);
                if u == 0.0 {
                    1.0
                } else {
                    (u.sin() / u).powi(2)
                }
            }
            Kernel::Hilbert => 1.0 / (x + y + 1.0),
        }
    })
}

/// Cauchy-like matrix 1 / (x_i − y_j) with x_i = i/n, y_j = (j + ½)/n.
pub fn gen_cauchy(n: usize) -> DenseMatrix {
    let nf = n as f64;
    DenseMatrix::from_fn(n, n, |i, j| 1.0 / (i as f64 / nf - (j as f64 + 0.5) / nf))
}
