use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::*;

/// Serializable description of a generated or file-backed input matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InputSpec {
    SvdProfile { n: usize, r: usize, seed: u64 },
    FactorGaussian { m: usize, n: usize, r: usize, noise: f64, seed: u64 },
    Laplacian { n: usize },
    FdInverse { m: usize, n: usize },
    Kernel { kernel: Kernel, m: usize, n: usize },
    Cauchy { n: usize },
    Delta { m: usize, n: usize, i: usize, j: usize },
    ShiftedDelta { m: usize, n: usize, i: usize, j: usize },
    MatrixMarket { path: PathBuf },
}

impl InputSpec {
    pub fn generate(&self) -> Result<DenseMatrix> {
        match self {
            InputSpec::SvdProfile { n, r, seed } => gen_svd_profile(*n, *r, &mut rng::from_seed(*seed)),
            InputSpec::FactorGaussian { m, n, r, noise, seed } => {
                if !(noise.is_finite() && *noise >= 0.0) {
                    return arg_err("noise must be finite and nonnegative");
                }
                gen_factor_gaussian(*m, *n, *r, *noise, &mut rng::from_seed(*seed))
            }
            InputSpec::Laplacian { n } => gen_laplacian(*n),
            InputSpec::FdInverse { m, n } => gen_fd_inverse(*m, *n),
            InputSpec::Kernel { kernel, m, n } => Ok(gen_kernel(*kernel, *m, *n)),
            InputSpec::Cauchy { n } => Ok(gen_cauchy(*n)),
            InputSpec::Delta { m, n, i, j } => gen_delta(*m, *n, *i, *j),
            InputSpec::ShiftedDelta { m, n, i, j } => gen_shifted_delta(*m, *n, *i, *j),
            InputSpec::MatrixMarket { path } => read_matrix_market(path),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("input specs serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
