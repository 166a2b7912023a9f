//! Dense decompositions, backed by faer. Matrices cross the boundary as
//! nalgebra types; faer is built without rayon so every call is sequential
//! and reproducible.

use faer::{Mat, MatRef, Side};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: Copy + nalgebra::Scalar>(m: MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in nonincreasing order and the matching left singular
/// vectors (thin).
pub(crate) fn left_singular(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let sigma = svd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((sigma, from_faer(svd.U())))
}

/// Eigenvalues in nondecreasing order with orthonormal eigenvectors as columns.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, from_faer(evd.U())))
}

pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, from_faer(evd.U())))
}

/// Orthonormal basis of the column space of a full-column-rank matrix.
pub(crate) fn thin_q(m: &DMatrix<C64>) -> DMatrix<C64> {
    from_faer(to_faer(m).qr().compute_thin_Q().as_ref())
}
