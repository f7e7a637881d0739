//! Dense complex linear algebra for the small operators this crate analyses.

mod eigen;
mod haar;
mod matrix;
mod scalar;

pub use eigen::{hermitian_eigensystem, EigenSystem};
pub use haar::{complex_gaussian, haar_random_unitary, haar_random_unitary_with};
pub use matrix::{tensor_product, DenseMatrix};
pub use scalar::{ceil_log2, ceil_log2_real, ceil_real, snap, INTEGER_SNAP};

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
