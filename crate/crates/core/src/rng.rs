//! Seeded randomness. Every randomized routine takes an explicit [`Rng`].

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;

use crate::linalg::DenseMatrix;

/// The crate-wide generator; ChaCha8 is portable, so a seed reproduces
/// bit-identical streams on every platform.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Mixes a master seed with a trial index (splitmix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_vec(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn sign(rng: &mut Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

pub fn sign_vec(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| sign(rng)).collect()
}

pub fn uniform(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}

/// Matrix with i.i.d. standard normal entries, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    DenseMatrix::from_vec_unchecked(rows, cols, normal_vec(rows * cols, rng))
}

/// `k` distinct indices from `0..n` in random order.
pub fn random_subset(n: usize, k: usize, rng: &mut Rng) -> Vec<usize> {
    sample(rng, n, k).into_vec()
}

pub fn random_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn index_below(n: usize, rng: &mut Rng) -> usize {
    rng.random_range(0..n)
}
