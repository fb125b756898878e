//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinklab_core::{rat, Matrix, Rational};

/// `n x n` matrix with entries uniform in `[0.01, 1)`.
pub fn positive_float(n: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::new(n, n, (0..n * n).map(|_| rng.random_range(0.01..1.0)).collect()).unwrap()
}

/// `n x n` matrix of small signed fractions.
pub fn small_rational(n: usize, seed: u64) -> Matrix<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n * n)
        .map(|_| rat(rng.random_range(-9..=9), rng.random_range(1..=9)))
        .collect();
    Matrix::new(n, n, entries).unwrap()
}
