//! Small dense solvers used on the hot path of the path searches.

use nalgebra::{DMatrix, DVector};

/// Relative threshold below which a pivot or singular value counts as zero.
pub(crate) const RANK_TOL: f64 = 1e-11;

/// In-place Cholesky factorization and solve of a row-major symmetric
/// `n × n` system. Returns `false` without a usable result when a pivot
/// falls below `RANK_TOL` times the largest diagonal entry.
pub(crate) fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = (0..n).map(|i| a[i * n + i]).fold(0.0_f64, f64::max);
    if !(scale > 0.0) {
        return false;
    }
    let floor = RANK_TOL * scale;
    for j in 0..n {
        let mut pivot = a[j * n + j];
        for k in 0..j {
            pivot -= a[j * n + k] * a[j * n + k];
        }
        if !(pivot > floor) {
            return false;
        }
        let pivot = pivot.sqrt();
        a[j * n + j] = pivot;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / pivot;
        }
    }
    // forward: L z = b
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    // backward: Lᵀ x = z
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in i + 1..n {
            v -= a[k * n + i] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    true
}

/// Minimum-norm least-squares solution of `a x = b` through the SVD,
/// discarding singular values below `RANK_TOL` times the largest one.
pub(crate) fn min_norm_solve(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    if !(smax > 0.0) {
        return DVector::zeros(b.len());
    }
    let eps = RANK_TOL * smax;
    // Σ⁺ with the cutoff applied explicitly; nalgebra's `solve` uses an
    // absolute epsilon.
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let mut coeffs = u.transpose() * b;
    for (c, s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if *s > eps { *c / *s } else { 0.0 };
    }
    v_t.transpose() * coeffs
}

/// Solves a row-major symmetric PSD system, falling back to the
/// minimum-norm solution when the matrix is (numerically) singular.
pub(crate) fn psd_solve(
    a: &[f64],
    n: usize,
    b: &[f64],
    scratch: &mut Vec<f64>,
    out: &mut Vec<f64>,
) {
    scratch.clear();
    scratch.extend_from_slice(a);
    out.clear();
    out.extend_from_slice(b);
    if n == 0 || cholesky_solve(scratch, n, out) {
        return;
    }
    let m = DMatrix::from_row_slice(n, n, a);
    let x = min_norm_solve(m, &DVector::from_column_slice(b));
    out.clear();
    out.extend(x.iter());
}
