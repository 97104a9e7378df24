//! Small dense linear-algebra helpers on top of `nalgebra` that the
//! Grassmannian kernel and the oracles share.

use nalgebra::{DMatrix, DVector};

/// Orthonormalize the rows of `rows` with modified Gram-Schmidt.
///
/// The span and the orientation of the row n-vector are preserved (the
/// transform is lower triangular with positive diagonal). Returns `None` when
/// the rows are numerically dependent.
pub fn orthonormalize_rows(rows: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut out = rows.clone();
    for i in 0..out.nrows() {
        for _pass in 0..2 {
            for j in 0..i {
                let proj = out.row(i).dot(&out.row(j));
                let rj = out.row(j).clone_owned();
                let mut ri = out.row_mut(i);
                ri -= rj * proj;
            }
        }
        let norm = libm::sqrt(out.row(i).norm_squared());
        if !(norm > 1e-12) {
            return None;
        }
        out.row_mut(i).unscale_mut(norm);
    }
    Some(out)
}

/// Maximum absolute deviation of `rows * rowsᵀ` from the identity.
pub fn row_gram_deviation(rows: &DMatrix<f64>) -> f64 {
    let gram = rows * rows.transpose();
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - target).abs());
        }
    }
    dev
}

/// Rows completing the orthonormal rows of `rows` to an orthonormal basis of
/// the ambient space.
///
/// Candidates are the standard basis vectors in order, so when `rows` spans
/// the first k coordinate axes the completion is exactly the remaining axes.
pub fn orthonormal_complement_rows(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = rows.ncols();
    let k = rows.nrows();
    let mut basis: alloc::vec::Vec<DVector<f64>> = (0..k).map(|i| rows.row(i).transpose()).collect();
    let mut extra = alloc::vec::Vec::new();
    for axis in 0..dim {
        if extra.len() == dim - k {
            break;
        }
        let mut cand = DVector::<f64>::zeros(dim);
        cand[axis] = 1.0;
        for _pass in 0..2 {
            for b in &basis {
                let proj = cand.dot(b);
                cand.axpy(-proj, b, 1.0);
            }
        }
        let norm = libm::sqrt(cand.norm_squared());
        if norm > 1e-6 {
            cand.unscale_mut(norm);
            basis.push(cand.clone());
            extra.push(cand);
        }
    }
    DMatrix::from_fn(extra.len(), dim, |i, j| extra[i][j])
}

/// Extend orthonormal columns to a square orthogonal matrix.
pub fn complete_columns(cols: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cols.nrows();
    let k = cols.ncols();
    if k == n {
        return cols.clone();
    }
    let extra = orthonormal_complement_rows(&cols.transpose());
    let mut out = DMatrix::zeros(n, n);
    out.columns_mut(0, k).copy_from(cols);
    out.columns_mut(k, n - k).copy_from(&extra.transpose());
    out
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().cholesky().map(|c| c.inverse())
}

/// Symmetric inverse square root of a symmetric positive-definite matrix.
pub fn spd_inverse_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / libm::sqrt(l)));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Eigenvalues of the symmetric pencil `(h, g)` with `g` positive definite,
/// sorted ascending.
pub fn generalized_eigenvalues(h: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<DVector<f64>> {
    let chol = g.clone().cholesky()?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse()?;
    let reduced = &l_inv * h * l_inv.transpose();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let mut vals: alloc::vec::Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Some(DVector::from_vec(vals))
}

/// Condition number of a symmetric positive-definite matrix.
pub fn spd_condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Frobenius inner product `tr(a bᵀ)`.
pub fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
