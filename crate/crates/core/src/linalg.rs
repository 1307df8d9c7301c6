//! Small dense matrix helpers for the group-mean dynamics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Relative asymmetry below which a matrix takes the symmetric spectral path.
const SYMMETRY_TOL: f64 = 1e-14;

/// True when `|a_ij - a_ji| <= tol * max|a|` for every pair.
pub fn is_symmetric(a: &DMatrix<f64>, tol: f64) -> bool {
    let n = a.nrows();
    if a.ncols() != n {
        return false;
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    (0..n).all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol * scale))
}

/// `exp(-t L) x`.
///
/// Symmetric `L` goes through its eigendecomposition; otherwise the
/// scaling-and-squaring Padé exponential of `-t L` is applied.
pub fn apply_exp_neg(l: &DMatrix<f64>, t: f64, x: &DVector<f64>) -> DVector<f64> {
    if t == 0.0 {
        return x.clone();
    }
    if is_symmetric(l, SYMMETRY_TOL) {
        let sym = l.clone().symmetrize();
        let eig = SymmetricEigen::new(sym);
        let q = &eig.eigenvectors;
        let mut coeff = q.transpose() * x;
        for (c, lambda) in coeff.iter_mut().zip(eig.eigenvalues.iter()) {
            *c *= (-lambda * t).exp();
        }
        q * coeff
    } else {
        (l * (-t)).exp() * x
    }
}

trait Symmetrize {
    fn symmetrize(self) -> Self;
}

impl Symmetrize for DMatrix<f64> {
    fn symmetrize(self) -> Self {
        let t = self.transpose();
        (self + t) * 0.5
    }
}
