//! Small dense linear-algebra helpers shared by the solvers.

use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a real symmetric matrix with eigenvalues sorted
/// ascending and eigenvectors reordered to match (columns).
pub fn sorted_symmetric_eigen<T: Scalar>(m: &DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let evals: Vec<T> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut evecs = DMatrix::<T>::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        evecs.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    (evals, evecs)
}

/// Max-norm of the elementwise difference of two equally sized matrices.
pub fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let mut m = T::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        let d = (*x - *y).abs();
        if d > m {
            m = d;
        }
    }
    m
}

/// Deviation of a square matrix from symmetry, ‖A - Aᵀ‖_max.
pub fn asymmetry<T: Scalar>(a: &DMatrix<T>) -> T {
    let mut m = T::zero();
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let d = (a[(i, j)] - a[(j, i)]).abs();
            if d > m {
                m = d;
            }
        }
    }
    m
}

/// ⟨v|M|v⟩ for a dense symmetric matrix.
pub fn quadratic_form<T: Scalar>(m: &DMatrix<T>, v: &DVector<T>) -> T {
    (v.transpose() * m * v)[(0, 0)]
}
