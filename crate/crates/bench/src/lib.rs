//! Fixtures shared by the benchmarks.

use canonpp::alpha_linalg::SquareMatrix;
use canonpp::kernels::TestFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real matrix with entries uniform in `[−1, 1)`.
pub fn random_matrix(n: usize, seed: u64) -> SquareMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    SquareMatrix::from_real_row_major(n, &entries).expect("square")
}

/// Spectrum with values uniform in `[0.05, 1)`.
pub fn random_spectrum(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(0.05..1.0)).collect()
}

/// Unit-height bump of width 2.
pub fn bump() -> TestFunction {
    TestFunction::bump(1, 1.0, 2.0).expect("bump")
}
