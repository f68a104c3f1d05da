//! Thin SVD of a dense `nalgebra` matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `(U, s, V)` with `m = U diag(s) Vᵀ`, singular values descending.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let (nr, nc) = m.shape();
    let mat = faer::Mat::<f64>::from_fn(nr, nc, |r, c| m[(r, c)]);
    let svd = mat.thin_svd().map_err(|_| Error::SvdFailure)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    let s: Vec<f64> = (0..k).map(|l| s[l]).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailure);
    }
    Ok((
        DMatrix::from_fn(nr, k, |r, c| u[(r, c)]),
        s,
        DMatrix::from_fn(nc, k, |r, c| v[(r, c)]),
    ))
}
