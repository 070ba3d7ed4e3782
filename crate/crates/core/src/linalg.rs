//! Small symmetric-matrix helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// `(m + m*) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix; pairs sorted by descending
/// eigenvalue so ellipse axes come out major-first.
pub fn sym_eigen(m: &DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let eig = symmetrize(m).symmetric_eigen();
    let mut pairs: Vec<(f64, DVector<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m)
        .last()
        .map(|(l, _)| *l)
        .unwrap_or(0.0)
}

/// Square-root factor `L` with `L L* = m` for symmetric PSD `m`.
///
/// Eigenvalues inside `[-tol, 0)` are clamped to zero so boundary-PSD
/// matrices (an exactly degenerate Ĉ, say) still factor; anything below
/// `-tol` is a real violation and errors out. `tol` scales with the trace.
pub fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let tol = 1e-8 * m.trace().abs().max(1.0);
    let pairs = sym_eigen(m);
    let mut factor = DMatrix::zeros(d, d);
    for (j, (lambda, vec)) in pairs.iter().enumerate() {
        if *lambda < -tol {
            return Err(Error::NotPsd { min_eig: *lambda });
        }
        let s = lambda.max(0.0).sqrt();
        for i in 0..d {
            factor[(i, j)] = vec[i] * s;
        }
    }
    Ok(factor)
}
