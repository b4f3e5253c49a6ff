//! Dense complex kernels shared by the system model and the optimizer.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value threshold used to decide numerical rank.
pub const RANK_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-10;

/// Orthonormal basis of the null space of `mᴴ`, i.e. the orthogonal
/// complement of the column space of `m`.
///
/// For `m` of shape `rows x cols` the result `b` is `rows x (rows - rank(m))`
/// with `bᴴ b = I` and `mᴴ b = 0`. An empty complement is reported as
/// [`Error::NoNullSpace`].
pub fn null_space_basis(m: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = m.shape();
    if rows == 0 {
        return Err(Error::DimensionMismatch("matrix has no rows".into()));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("null_space_basis input"));
    }

    // Zero-pad to a square matrix so the SVD yields a full unitary U; the
    // trailing left singular vectors span the complement of range(m).
    let width = rows.max(cols);
    let mut padded = CMatrix::zeros(rows, width);
    padded.view_mut((0, 0), (rows, cols)).copy_from(m);
    let svd = padded.svd(true, false);
    let u = svd.u.ok_or(Error::Singular)?;
    let sigma = &svd.singular_values;

    let sigma_max = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = RANK_TOL * sigma_max;
    // U has `min(rows, width) = rows` columns paired with the singular values.
    let null_cols: Vec<usize> = (0..rows)
        .filter(|&k| sigma_max == 0.0 || sigma[k] <= cutoff)
        .collect();
    let rank = rows - null_cols.len();
    if null_cols.is_empty() {
        return Err(Error::NoNullSpace { rows, cols, rank });
    }

    let mut basis = CMatrix::zeros(rows, null_cols.len());
    for (j, &k) in null_cols.iter().enumerate() {
        basis.set_column(j, &u.column(k));
    }
    Ok(basis)
}

/// Stacks real and imaginary parts: `x ↦ [Re x; Im x]`.
pub fn complex_to_real(x: &CVector) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].re } else { x[i - n].im })
}

/// Inverse of [`complex_to_real`].
pub fn real_to_complex(v: &DVector<f64>) -> CVector {
    let n = v.len() / 2;
    CVector::from_fn(n, |i, _| Complex64::new(v[i], v[i + n]))
}

/// Real matrix `R(m)` with `complex_to_real(m x) = R(m) complex_to_real(x)`.
pub fn complex_matrix_to_real(m: &CMatrix) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let v = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

fn max_hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Real value of the Hermitian form `fᴴ A f`.
pub fn hermitian_quadratic(f: &CVector, a: &CMatrix) -> Result<f64> {
    if !a.is_square() || a.nrows() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "form of a {}x{} matrix with a length-{} vector",
            a.nrows(),
            a.ncols(),
            f.len()
        )));
    }
    let defect = max_hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let value = f.dotc(&(a * f));
    Ok(value.re)
}

/// `det(I₂ + H Hᴴ C⁻¹)` for a 2x2 channel `H` and a 2x2 Hermitian positive
/// definite noise covariance `C`.
pub fn det_2x2_hermitian_form(h: &CMatrix, c: &CMatrix) -> Result<f64> {
    if h.shape() != (2, 2) || c.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("expected 2x2 matrices".into()));
    }
    let defect = max_hermitian_defect(c);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let det_c = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    if det_c.re <= f64::MIN_POSITIVE || c[(0, 0)].re <= 0.0 {
        return Err(Error::Singular);
    }
    let c_inv = CMatrix::from_row_slice(2, 2, &[c[(1, 1)], -c[(0, 1)], -c[(1, 0)], c[(0, 0)]])
        / det_c;
    let m = CMatrix::identity(2, 2) + h * h.adjoint() * c_inv;
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Ok(det.re)
}
