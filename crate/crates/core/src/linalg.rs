//! Small dense complex linear-algebra helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖m − m*‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    frobenius(&(m - m.adjoint()))
}

/// `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `m^{-1/2}` for a positive definite `m`; `None` if some eigenvalue is below `floor`.
pub fn inverse_sqrt(m: &CMatrix, floor: f64) -> Option<CMatrix> {
    let (values, vectors) = hermitian_eigen(m);
    if values.iter().any(|&v| v < floor) {
        return None;
    }
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(1.0 / v.sqrt(), 0.0)),
    ));
    Some(&vectors * diag * vectors.adjoint())
}

/// Extend the orthonormal columns of `v` (`k × h`) to a `k × k` unitary whose
/// first `h` columns are exactly `v`. Gram–Schmidt against the standard basis.
pub fn complete_to_unitary(v: &CMatrix) -> CMatrix {
    let k = v.nrows();
    let h = v.ncols();
    let mut out = CMatrix::zeros(k, k);
    for j in 0..h {
        out.set_column(j, &v.column(j));
    }
    let mut filled = h;
    for e in 0..k {
        if filled == k {
            break;
        }
        let mut w = CVector::zeros(k);
        w[e] = ONE;
        // two passes of modified Gram–Schmidt for stability
        for _ in 0..2 {
            for j in 0..filled {
                let col = out.column(j);
                let proj = col.dotc(&w);
                w -= col * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            out.set_column(filled, &(w / c(norm, 0.0)));
            filled += 1;
        }
    }
    debug_assert_eq!(filled, k);
    out
}

/// Orthonormal basis (columns) of the numerical null space of a real matrix.
pub fn real_null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to square so the SVD returns a full right basis
    let rows = m.nrows().max(n);
    let mut sq = DMatrix::<f64>::zeros(rows, n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (dst, &i) in cols.iter().enumerate() {
        out.set_column(dst, &v_t.row(i).transpose());
    }
    out
}
