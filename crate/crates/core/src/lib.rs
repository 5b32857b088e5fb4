//! Sublinear-cost randomized low-rank approximation.
//!
//! The crate is organised bottom-up: [`linalg`] holds the dense container and
//! factorizations, [`multipliers`] the structured sketch operators, and the
//! algorithm modules ([`lsr`], [`lra`], [`cur`], [`leverage`], [`hss`]) build on
//! both. [`testgen`] produces the input families used by the benchmarks.

pub mod counters;
pub mod cur;
pub mod error;
pub mod hss;
pub mod leverage;
pub mod linalg;
pub mod lra;
pub mod lsr;
pub mod multipliers;
pub mod rng;
pub mod source;
pub mod testgen;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, IndexSet, LowRankFactors, Svd, Tolerance};
pub use multipliers::SketchOperator;

pub use rng::Rng;
pub use source::EntrySource;
