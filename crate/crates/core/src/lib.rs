//! Simulation toolkit for dopant-array lattices of spin-polarized electrons
//! coupled to nuclear spins.
//!
//! The model is a single-band tight-binding chain/square/honeycomb lattice
//! with a contact hyperfine coupling between the local electron density and
//! a spin-S moment at each site, external longitudinal/transverse fields on
//! the moments, and a screened long-range Coulomb repulsion:
//!
//! ```text
//! H = -t Σ_<ij> (c_i† c_j + h.c.) - Σ_i μ_i n_i
//!     - Σ_i (g n_i I_i^z + h_z I_i^z + h_x I_i^x)
//!     + Σ_<ij-pairs> V_ij n_i n_j
//! ```
//!
//! Two complementary solvers are provided: exact diagonalization on small
//! clusters ([`ed`]) and self-consistent Hartree-Fock / finite-temperature
//! Hartree-Fock-Bogoliubov mean field for larger arrays ([`meanfield`]).
//! Diagnostics (staggered order parameter, correlators, pairing average,
//! pinned-defect static potentials) live in [`observables`], Coulomb-blockade
//! linear conductance in [`transport`], and momentum-space checks in
//! [`bands`].
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Scalar`] trait (`f32` or `f64`); the type aliases at the crate root pin
//! the default `f64` instantiations.

pub mod bands;
pub mod ed;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod observables;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar used by the command-line tools and the test suite.
pub type Real = f64;

pub type LatticeGraph64 = lattice::LatticeGraph<f64>;
pub type CoulombMatrix64 = lattice::CoulombMatrix<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type MeanFieldState64 = meanfield::MeanFieldState<f64>;
pub type ManyBodySpectrum64 = ed::ManyBodySpectrum<f64>;
pub type ObservableReport64 = observables::ObservableReport<f64>;

/// Boltzmann constant in meV/K; all inverse temperatures are 1/meV.
pub const K_B_MEV_PER_K: f64 = 8.617333262e-2;

/// Convert a temperature in millikelvin to an inverse temperature in 1/meV.
pub fn beta_from_mk<T: Scalar>(t_mk: T) -> T {
    T::one() / (T::from_f(K_B_MEV_PER_K * 1e-3) * t_mk)
}
