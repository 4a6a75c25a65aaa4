//! Linear-algebra primitives: CSR and dense matrices, vector kernels,
//! energy norms and direct factorizations.

pub mod dense;
pub mod sparse;
pub mod vector;

pub use dense::{dense_cholesky_solve, Cholesky, DenseMatrix, SymmetricEigen};
pub use sparse::{spmv, spmv_t, SparseMatrix};
pub use vector::{axpy, dot, norm2, scale, sub};

use crate::error::{check_len, Error, Result};

/// Energy norm `sqrt(x^T M x)`.
///
/// Fails with [`Error::Indefinite`] when the quadratic form is negative.
pub fn weighted_norm(x: &[f64], m: &SparseMatrix) -> Result<f64> {
    check_len("weighted_norm (matrix rows)", m.n_rows(), x.len())?;
    check_len("weighted_norm (matrix cols)", m.n_cols(), x.len())?;
    let mut mx = alloc::vec![0.0; x.len()];
    m.mul_vec_into(x, &mut mx);
    let q = vector::dot_unchecked(x, &mx);
    if q < 0.0 {
        return Err(Error::Indefinite { value: q });
    }
    Ok(libm::sqrt(q))
}
