use thiserror::Error;

/// Errors raised across the crate. Algorithms that can fail on unlucky
/// random choices report it through dedicated variants so callers can retry.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("svd did not converge within the iteration cap")]
    NonConvergence,
    #[error("condition number is undefined for the zero matrix")]
    ZeroMatrix,
    #[error("materializing a {rows}x{cols} operator exceeds the cap {cap}")]
    CapExceeded { rows: usize, cols: usize, cap: usize },
    #[error("operator is complex and cannot be applied to a real matrix")]
    ComplexOperator,
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("sketched matrix has numerical rank {rank}, need {needed}")]
    SketchRankFailure { rank: usize, needed: usize },
    #[error("range finder failure: numerical rank {rank} < target {target}")]
    RangeFailure { rank: usize, target: usize },
    #[error("pre-multiplied range finder failure: rank(FU) = {rank} < target {target}")]
    PremultRankFailure { rank: usize, target: usize },
    #[error("maxvol selection failure: {0}")]
    SelectionFailure(String),
    #[error("CUR generator has numerical rank {rank} < target {target}")]
    GeneratorRankFailure { rank: usize, target: usize },
    #[error("LRA core has numerical rank {rank} < target {target}")]
    CoreRankFailure { rank: usize, target: usize },
    #[error("expected-count sampler returned no columns after {attempts} attempts")]
    EmptySample { attempts: usize },
    #[error("columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for the failures a randomized algorithm may hit on a valid input.
    pub fn is_algorithmic(&self) -> bool {
        matches!(
            self,
            Error::SketchRankFailure { .. }
                | Error::RangeFailure { .. }
                | Error::PremultRankFailure { .. }
                | Error::SelectionFailure(_)
                | Error::GeneratorRankFailure { .. }
                | Error::CoreRankFailure { .. }
                | Error::EmptySample { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::DimensionMismatch(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
