use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::eigen::orthonormalize;
use super::{DenseMatrix, C64};
use crate::error::{Error, Result};

/// A standard complex Gaussian sample, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary of the given dimension, deterministic in `seed`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<DenseMatrix> {
    haar_random_unitary_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Gram-Schmidt on the columns of a complex Ginibre matrix. The triangular
/// factor this implies has a positive real diagonal, which is the phase
/// normalization that makes the result Haar distributed.
pub fn haar_random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DenseMatrix> {
    if dim == 0 {
        return Err(Error::validation("unitary dimension", "dim must be at least 1"));
    }
    let mut columns: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect())
        .collect();
    let all: Vec<usize> = (0..dim).collect();
    orthonormalize(&mut columns, &all);
    Ok(DenseMatrix::from_columns(&columns))
}
