//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Solves `a x = b` for symmetric positive definite `a`. Falls back to LU for
/// indefinite but nonsingular systems.
pub fn solve_sym(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Some(ch.solve(b));
    }
    a.clone().lu().solve(b).filter(|x| x.iter().all(|v| v.is_finite()))
}

/// Inverse of a symmetric positive definite matrix.
pub fn inverse_spd(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = match a.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => a.clone().try_inverse()?,
    };
    inv.iter().all(|v| v.is_finite()).then(|| symmetrize(&inv))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])])
}

pub fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Lower-triangular rank-one update `acc += w x xᵀ` on a packed d×d buffer
/// (row-major, full storage, only `c <= r` touched).
#[inline]
pub fn add_outer_lower(acc: &mut [f64], x: &[f64], w: f64) {
    let d = x.len();
    for r in 0..d {
        let wr = w * x[r];
        let row = &mut acc[r * d..r * d + r + 1];
        for (c, a) in row.iter_mut().enumerate() {
            *a += wr * x[c];
        }
    }
}

/// Copies the lower triangle of a packed buffer into a full symmetric matrix.
pub fn lower_to_matrix(acc: &[f64], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |r, c| if c <= r { acc[r * d + c] } else { acc[c * d + r] })
}
