//! Seed-fixed fixtures shared by the unit tests.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;
use crate::problem::{Constraint, ManifoldSpec, Sense};

pub fn uniform(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// `A Aᵀ + shift · I`.
pub fn spd(n: usize, shift: f64, seed: u64) -> Matrix {
    let a = uniform(n, n, seed);
    &a * a.transpose() + Matrix::identity(n, n) * shift
}

/// PSD objective with an SPD constraint.
pub fn random_spec(n: usize, seed: u64) -> ManifoldSpec {
    let m = spd(n, 0.0, seed);
    let c = spd(n, 0.5, seed ^ 0x5bd1_e995);
    ManifoldSpec::custom(m, Constraint::Matrix(c), Sense::Minimize).unwrap()
}

pub fn random_specs(n: usize, views: usize, seed: u64) -> Vec<ManifoldSpec> {
    (0..views).map(|v| random_spec(n, seed * 31 + v as u64)).collect()
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}
