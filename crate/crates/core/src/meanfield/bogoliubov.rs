//! One Bogoliubov diagonalization step: solve the 2N×2N eigenproblem
//!
//!   [  H   Δ  ] (U_i)     (U_i)
//!   [ -Δ* -H* ] (V_i) = E_i(V_i)
//!
//! select the positive-energy branch, and rebuild (ρ, K) with Fermi-Dirac
//! occupations
//!   ρ = Uᵀ f U* + V† (1-f) V,   K = Uᵀ f V* + V† (1-f) U.

use crate::linalg::sorted_symmetric_eigen;
use crate::meanfield::fermi_occupation;
use crate::model::Beta;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct BogoliubovStep<T: Scalar> {
    /// Quasiparticle amplitudes, quasiparticle i in row i.
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    /// Positive-branch energies, ascending.
    pub energies: Vec<T>,
    /// Fermi-Dirac occupations of the quasiparticles.
    pub occupations: Vec<T>,
    pub rho: DMatrix<T>,
    pub pairing: DMatrix<T>,
    /// A quasiparticle energy sat at zero within tolerance (branch choice
    /// ambiguous).
    pub zero_mode: bool,
}

pub fn bogoliubov_step<T: Scalar>(
    h_sp: &DMatrix<T>,
    delta: &DMatrix<T>,
    beta: Beta<T>,
) -> BogoliubovStep<T> {
    let n = h_sp.nrows();
    let mut m = DMatrix::<T>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = h_sp[(i, j)];
            m[(i, n + j)] = delta[(i, j)];
            m[(n + i, j)] = -delta[(i, j)];
            m[(n + i, n + j)] = -h_sp[(i, j)];
        }
    }
    let (evals, evecs) = sorted_symmetric_eigen(&m);
    // spectrum is symmetric about zero; the top N columns are the
    // non-negative branch, already ascending
    let scale = evals[2 * n - 1].abs().max(T::one());
    let zero_tol = T::from_f(1e-10) * scale;
    let mut u = DMatrix::<T>::zeros(n, n);
    let mut v = DMatrix::<T>::zeros(n, n);
    let mut energies = Vec::with_capacity(n);
    let mut zero_mode = false;
    for q in 0..n {
        let col = n + q;
        energies.push(evals[col]);
        if evals[col].abs() < zero_tol {
            zero_mode = true;
        }
        for j in 0..n {
            u[(q, j)] = evecs[(j, col)];
            v[(q, j)] = evecs[(n + j, col)];
        }
    }
    let occupations: Vec<T> = energies.iter().map(|&e| fermi_occupation(beta, e)).collect();
    let f = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(occupations.clone()));
    let one_minus_f = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        occupations.iter().map(|&x| T::one() - x).collect::<Vec<_>>(),
    ));
    let rho = u.transpose() * &f * &u + v.transpose() * &one_minus_f * &v;
    let pairing = u.transpose() * &f * &v + v.transpose() * &one_minus_f * &u;
    BogoliubovStep {
        u,
        v,
        energies,
        occupations,
        rho,
        pairing,
        zero_mode,
    }
}
