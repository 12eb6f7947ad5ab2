//! Exact diagonalization of the coupled fermion ⊗ nuclear-spin Hamiltonian
//! on small clusters.
//!
//! The Hilbert space is blocked by total electron number n (the Hamiltonian
//! conserves it exactly); each sector is spanned by occupation bitstrings
//! times nuclear-spin configurations. Fermion operators follow the
//! Jordan-Wigner convention with ascending site ordering (row-major on 2D
//! lattices), which fixes all matrix-element signs.

mod basis;
mod hamiltonian;
mod lanczos;
mod spectrum;
mod thermal;

pub use basis::{annihilate, create, ManyBodyBasis};
pub use hamiltonian::{build_sector_hamiltonian, SparseSym};
pub use lanczos::lowest_eigenpair;
pub use spectrum::{
    CreationBlock,
    full_spectrum, ground_state, ground_state_of_sector, GroundState, ManyBodySpectrum,
    SectorSpectrum, SpectrumDump,
};
pub use thermal::{
    thermal_correlator, thermal_energy, thermal_ensemble, thermal_site_density, thermal_spin_x,
    thermal_spin_z, thermal_spin_zz_ref, thermal_total_charge, total_charge_profile,
    ChargeProfileRow, ThermalEnsemble,
};

/// Solver knobs for exact diagonalization.
#[derive(Debug, Clone, Copy)]
pub struct EdConfig {
    /// Largest sector dimension the builder accepts.
    pub dim_cap: usize,
    /// Sectors up to this dimension are diagonalized densely; larger ones
    /// fall back to Lanczos for ground states only.
    pub dense_cutoff: usize,
    /// Relative tolerance for grouping degenerate levels.
    pub degeneracy_tol: f64,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig {
            dim_cap: 200_000,
            dense_cutoff: 4000,
            degeneracy_tol: 1e-9,
        }
    }
}
