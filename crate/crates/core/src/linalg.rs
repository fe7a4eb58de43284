//! Thin wrappers around the dense decompositions so failure surfaces as a
//! crate error instead of a panic, plus index-set submatrix extraction.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::{Error, Result};

const EIG_MAX_ITER: usize = 10_000;

/// Symmetric eigendecomposition; eigenvalues unsorted, eigenvectors are the
/// columns of the returned matrix.
pub(crate) fn sym_eig(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::EigendecompositionFailure)?;
    Ok((se.eigenvalues, se.eigenvectors))
}

/// Full SVD with both factors.
pub(crate) fn svd(m: &DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m.clone(), true, true, f64::EPSILON, EIG_MAX_ITER).ok_or(Error::SvdFailure)
}

/// Singular values only, descending.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(DVector::from_vec(sv))
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Enforces exact entrywise symmetry by averaging mirrored entries.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, &v| acc.max(crate::scalar::abs(v)))
}
