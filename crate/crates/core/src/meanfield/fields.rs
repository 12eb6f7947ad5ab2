//! Mean-field decoupling of the Coulomb vertex and the classical spin
//! update.

use crate::lattice::CoulombMatrix;
use crate::model::{Beta, ModelParams};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Hartree/Fock field Γ and pairing field Δ from the current (ρ, K).
///
/// With the pair interaction Σ_{i<j} V_ij n_i n_j, Wick factorization gives
///   Γ_ii = Σ_{l≠i} V_il ρ_ll          (Hartree)
///   Γ_ij = -V_ij ρ_ij,  i ≠ j         (Fock)
///   Δ_ij = V_ij K_ij                  (pairing)
/// so that E_int = Σ_{i<j} V_ij (ρ_ii ρ_jj - |ρ_ij|² + |K_ij|²).
pub fn mean_fields<T: Scalar>(
    rho: &DMatrix<T>,
    pairing: &DMatrix<T>,
    coulomb: &CoulombMatrix<T>,
    include_fock: bool,
    include_pairing: bool,
) -> (DMatrix<T>, DMatrix<T>) {
    let n = rho.nrows();
    let mut gamma = DMatrix::<T>::zeros(n, n);
    let mut delta = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        let mut hartree = T::zero();
        for l in 0..n {
            if l != i {
                hartree += coulomb.v[(i, l)] * rho[(l, l)];
            }
        }
        gamma[(i, i)] = hartree;
        for j in 0..n {
            if j != i {
                if include_fock {
                    gamma[(i, j)] = -coulomb.v[(i, j)] * rho[(i, j)];
                }
                if include_pairing {
                    delta[(i, j)] = coulomb.v[(i, j)] * pairing[(i, j)];
                }
            }
        }
    }
    (gamma, delta)
}

/// Thermal-equilibrium magnetization of an isolated spin-S in a field of
/// magnitude b at inverse temperature β: m = Σ_m m e^{βbm} / Σ_m e^{βbm}
/// over m = -S..S, evaluated with an exponent shift. Equals S at T = 0 and
/// S B_S(βSb) in closed form (= (1/2)tanh(βb/2) for S = 1/2).
pub fn brillouin_magnetization<T: Scalar>(beta: Beta<T>, b: T, two_s: u32) -> T {
    let s = T::from_f(two_s as f64 / 2.0);
    match beta {
        Beta::Infinite => s,
        Beta::Finite(bt) => {
            let x = bt * b;
            let mut z = T::zero();
            let mut num = T::zero();
            for level in 0..=two_s {
                let m = T::from_f(level as f64) - s;
                // shift by the largest exponent x·S
                let w = (x * (m - s)).exp();
                z += w;
                num += m * w;
            }
            num / z
        }
    }
}

/// Classical spin vectors aligned with the effective field
/// b_i = (h_x, 0, h_z + g ρ_ii + ε_i). A vanishing field keeps the previous
/// spin and raises the flag; the result is never NaN.
pub fn spin_update<T: Scalar>(
    rho_diag: &[T],
    previous: &[[T; 3]],
    p: &ModelParams<T>,
    epsilon: &[T],
    beta: Beta<T>,
) -> (Vec<[T; 3]>, bool) {
    let g = p.g_mev();
    let mut zero_flag = false;
    let spins = rho_diag
        .iter()
        .enumerate()
        .map(|(i, &nd)| {
            let bx = p.h_x;
            let bz = p.h_z + g * nd + epsilon[i];
            let norm = (bx * bx + bz * bz).sqrt();
            if norm <= T::from_f(1e-300) {
                zero_flag = true;
                previous[i]
            } else {
                let m = brillouin_magnetization(beta, norm, p.two_s);
                [m * bx / norm, T::zero(), m * bz / norm]
            }
        })
        .collect();
    (spins, zero_flag)
}
