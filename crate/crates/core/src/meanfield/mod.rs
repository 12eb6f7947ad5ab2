//! Self-consistent mean-field solvers: zero-temperature Hartree-Fock at
//! fixed electron number and finite-temperature Hartree-Fock-Bogoliubov in
//! the grand canonical ensemble.
//!
//! The nuclear spins are treated as site-local classical vectors of maximal
//! length S at T = 0, shortened by the spin-S Brillouin function at T > 0,
//! self-consistently aligned with the effective field
//! (h_x, 0, h_z + g ρ_ii + ε_i). The fermions see the frozen spin texture as
//! the site potential -g⟨I_i^z⟩. The Coulomb channel is decoupled in the
//! Hartree, Fock (optional), and pairing (optional) channels; each unordered
//! pair carries the energy V_ij once.
//!
//! The iteration map is
//!   mean fields → Bogoliubov step → spin update → linear mixing,
//! and the grand potential Ω = E - μN - TS (fermionic quasiparticle entropy)
//! is tracked every accepted iterate. After the first five iterations an
//! increase of Ω rejects the step and halves the mixing; among restarts the
//! lowest-Ω converged state wins.

mod bogoliubov;
mod fields;
mod solver;

pub use bogoliubov::{bogoliubov_step, BogoliubovStep};
pub use fields::{brillouin_magnetization, mean_fields, spin_update};
pub use solver::{one_iteration, solve, solve_with_start, tune_chemical_potential};

use crate::error::{Error, Result};
use crate::model::Beta;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which self-consistent problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    /// T = 0 Hartree-Fock at fixed electron number (no pairing channel).
    HartreeFockT0,
    /// Finite-temperature Hartree-Fock-Bogoliubov at fixed μ and β.
    Fthfb,
}

/// Initial-guess style for the spin texture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitStyle {
    /// Néel seed ⟨I_i^z⟩ = δ_i S(1-η) plus small seeded transverse noise.
    Staggered,
    /// All spins along +z.
    Uniform,
    /// Seeded random xz-plane directions.
    Random,
    /// Spins aligned with the sign of the pinning field (requires pinning).
    Pinned,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig<T> {
    /// Linear mixing α ∈ (0, 1].
    pub mixing: T,
    /// Max-norm tolerance on the self-consistency residual of (ρ, K, spins).
    pub tolerance: T,
    pub max_iterations: usize,
    /// Number of restart seeds tried (staggered, uniform, random, ...).
    pub restarts: usize,
    pub seed: u64,
    /// Force one particular seed style instead of the restart ladder.
    pub init: Option<InitStyle>,
    /// Include the Fock (exchange) Coulomb channel.
    pub include_fock: bool,
    /// Include the anomalous ⟨cc⟩ channel (FTHFB only).
    pub include_pairing: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            mixing: T::from_f(0.5),
            tolerance: T::from_f(1e-10),
            max_iterations: 5000,
            restarts: 3,
            seed: 1234,
            init: None,
            include_fock: true,
            include_pairing: true,
        }
    }
}

/// Converged (or best-effort) mean-field state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MeanFieldState<T: Scalar> {
    /// Single-particle density matrix ρ_ij = ⟨c_j† c_i⟩.
    pub rho: DMatrix<T>,
    /// Pairing matrix K_ij = ⟨c_j c_i⟩ (antisymmetric).
    pub pairing: DMatrix<T>,
    /// Classical nuclear-spin vectors ⟨I_i⟩, |⟨I_i⟩| ≤ S.
    pub spins: Vec<[T; 3]>,
    /// Bogoliubov amplitudes, quasiparticle i in row i.
    pub u: DMatrix<T>,
    pub v: DMatrix<T>,
    /// Positive-branch quasiparticle energies, ascending (meV).
    pub quasiparticle_energies: Vec<T>,
    /// Grand potential Ω = E - μN - TS (meV).
    pub omega: T,
    /// Mean-field energy E without the -μN term (meV).
    pub energy: T,
    pub total_n: T,
    pub iterations: usize,
    pub converged: bool,
    /// Ω of every accepted iterate.
    pub omega_trace: Vec<T>,
    /// A quasiparticle energy crossed zero during branch selection.
    pub zero_mode_flagged: bool,
    /// Some site saw a vanishing effective spin field (previous spin kept).
    pub spin_field_zero_flagged: bool,
}

impl<T: Scalar> MeanFieldState<T> {
    pub fn n_sites(&self) -> usize {
        self.rho.nrows()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Solver(format!("checkpoint parse: {e}")))
    }

    /// Verify the state invariants: ρ eigenvalues in [0, 1], K = -Kᵀ,
    /// UU† + VV† = 1, UVᵀ + VUᵀ = 0, |⟨I⟩| ≤ S (all within 1e-8/1e-12).
    pub fn check_invariants(&self, spin_s: T) -> Result<()> {
        let tol = T::from_f(1e-8);
        let n = self.n_sites();
        let (rho_evals, _) = crate::linalg::sorted_symmetric_eigen(&self.rho);
        for &ev in &rho_evals {
            if ev < -tol || ev > T::one() + tol {
                return Err(Error::Solver(format!(
                    "ρ eigenvalue {:.3e} outside [0, 1]",
                    ev.to_f()
                )));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (self.pairing[(i, j)] + self.pairing[(j, i)]).abs() > tol {
                    return Err(Error::Solver("K not antisymmetric".into()));
                }
            }
        }
        let uu = &self.u * self.u.transpose() + &self.v * self.v.transpose();
        if crate::linalg::max_abs_diff(&uu, &DMatrix::identity(n, n)) > tol {
            return Err(Error::Solver("UU† + VV† deviates from 1".into()));
        }
        let uv = &self.u * self.v.transpose() + &self.v * self.u.transpose();
        if uv.iter().any(|x| x.abs() > tol) {
            return Err(Error::Solver("UVᵀ + VUᵀ deviates from 0".into()));
        }
        let s_bound = spin_s + T::from_f(1e-12);
        for sp in &self.spins {
            let norm = (sp[0] * sp[0] + sp[1] * sp[1] + sp[2] * sp[2]).sqrt();
            if norm > s_bound {
                return Err(Error::Solver(format!(
                    "spin length {:.3e} exceeds S",
                    norm.to_f()
                )));
            }
        }
        Ok(())
    }
}

/// Fermi-Dirac occupation with the T = 0 sentinel (step function, ties at 1/2).
pub fn fermi_occupation<T: Scalar>(beta: Beta<T>, e: T) -> T {
    match beta {
        Beta::Infinite => {
            if e > T::zero() {
                T::zero()
            } else if e < T::zero() {
                T::one()
            } else {
                T::from_f(0.5)
            }
        }
        Beta::Finite(b) => {
            let x = b * e;
            let lim = T::from_f(700.0);
            if x > lim {
                T::zero()
            } else if x < -lim {
                T::one()
            } else {
                T::one() / (T::one() + x.exp())
            }
        }
    }
}

/// f ln f + (1-f) ln(1-f), with the 0 ln 0 = 0 convention (entropy is -k_B
/// times the sum of this over quasiparticles).
pub fn occupation_entropy_term<T: Scalar>(f: T) -> T {
    let mut acc = T::zero();
    if f > T::zero() {
        acc += f * f.ln();
    }
    let g = T::one() - f;
    if g > T::zero() {
        acc += g * g.ln();
    }
    acc
}
