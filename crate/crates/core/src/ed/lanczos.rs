//! Lanczos iteration with full reorthogonalization for extremal eigenpairs
//! of large sparse symmetric sectors.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lowest eigenpair of a symmetric operator given through its matvec.
/// The returned pair satisfies ‖Hv - λv‖ < tol·max(1, |λ|).
pub fn lowest_eigenpair<T: Scalar>(
    dim: usize,
    matvec: &dyn Fn(&DVector<T>, &mut DVector<T>),
    max_subspace: usize,
    tol: T,
    seed: u64,
) -> Result<(T, DVector<T>)> {
    if dim == 0 {
        return Err(Error::Eigen("empty operator".into()));
    }
    if dim == 1 {
        let x = DVector::from_element(1, T::one());
        let mut y = DVector::zeros(1);
        matvec(&x, &mut y);
        return Ok((y[0], x));
    }
    let m_max = max_subspace.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<DVector<T>> = Vec::with_capacity(m_max);
    let mut v = DVector::from_fn(dim, |_, _| T::from_f(rng.gen_range(-1.0..1.0)));
    let norm = v.norm();
    v /= norm;
    q.push(v);

    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let mut w = DVector::zeros(dim);

    for it in 0..m_max {
        matvec(&q[it], &mut w);
        let alpha = q[it].dot(&w);
        alphas.push(alpha);
        w -= &q[it] * alpha;
        if it > 0 {
            let b = betas[it - 1];
            w -= &q[it - 1] * b;
        }
        // full reorthogonalization keeps the Krylov basis numerically sound
        for qi in &q {
            let ov = qi.dot(&w);
            w -= qi * ov;
        }
        let beta = w.norm();

        // check convergence of the lowest Ritz pair
        if it >= 1 || beta <= T::from_f(1e-300) {
            let (ritz_val, ritz_vec) = lowest_ritz(&alphas, &betas);
            // standard estimate: |β_m s_m| for the last Ritz component
            let resid = beta * ritz_vec[ritz_vec.len() - 1].abs();
            if resid < tol * ritz_val.abs().max(T::one()) || beta <= T::from_f(1e-300) || it + 1 == m_max
            {
                let mut vec = DVector::zeros(dim);
                for (k, qk) in q.iter().enumerate() {
                    vec += qk * ritz_vec[k];
                }
                let n = vec.norm();
                vec /= n;
                // explicit residual check of the assembled vector
                matvec(&vec, &mut w);
                let lam = vec.dot(&w);
                let resid_full = (&w - &vec * lam).norm();
                if resid_full < tol * lam.abs().max(T::one()) {
                    return Ok((lam, vec));
                }
                if it + 1 == m_max || beta <= T::from_f(1e-300) {
                    return Err(Error::Eigen(format!(
                        "Lanczos stalled: residual {:e} after {} iterations",
                        resid_full.to_f(),
                        it + 1
                    )));
                }
            }
        }
        betas.push(beta);
        q.push(&w / beta);
    }
    Err(Error::Eigen("Lanczos failed to converge".into()))
}

/// Lowest eigenpair of the tridiagonal (alphas, betas) matrix.
fn lowest_ritz<T: Scalar>(alphas: &[T], betas: &[T]) -> (T, Vec<T>) {
    let m = alphas.len();
    let mut tm = DMatrix::<T>::zeros(m, m);
    for i in 0..m {
        tm[(i, i)] = alphas[i];
        if i + 1 < m {
            tm[(i, i + 1)] = betas[i];
            tm[(i + 1, i)] = betas[i];
        }
    }
    let (vals, vecs) = crate::linalg::sorted_symmetric_eigen(&tm);
    (vals[0], vecs.column(0).iter().copied().collect())
}
