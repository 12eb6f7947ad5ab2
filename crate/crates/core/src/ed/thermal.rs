//! Grand-canonical thermal expectation values over the union of all
//! electron-number sectors.
//!
//! Weights e^{-β(E - μn)} are evaluated with a global energy shift
//! (log-sum-exp) so that β of order 10^6 per meV stays finite. The uniform
//! chemical potential enters only through the ensemble; spectra are built
//! once at μ_site = 0 and reused across μ sweeps.

use crate::ed::spectrum::{full_spectrum, ManyBodySpectrum, SectorSpectrum};
use crate::ed::EdConfig;
use crate::error::{Error, Result};
use crate::lattice::{coulomb_matrix, LatticeGraph};
use crate::model::{Beta, ModelParams};
use crate::scalar::Scalar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Normalized Boltzmann weights over (sector, eigenstate) pairs.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble<T> {
    pub terms: Vec<(usize, usize, T)>,
}

/// Sectors whose best Boltzmann factor is below this fraction of the global
/// maximum are skipped.
const SECTOR_CUTOFF: f64 = 1e-14;

pub fn thermal_ensemble<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    beta: Beta<T>,
    mu: T,
) -> Result<ThermalEnsemble<T>> {
    match beta {
        Beta::Infinite => {
            // ground manifold of the grand energies E - μn, equal weights
            let mut best = T::infinity();
            for (n, sec) in spec.sectors.iter().enumerate() {
                let e = sec.evals[0] - mu * T::from_f(n as f64);
                if e < best {
                    best = e;
                }
            }
            let tol = T::from_f(spec.degeneracy_tol) * best.abs().max(T::one());
            let mut terms = Vec::new();
            for (n, sec) in spec.sectors.iter().enumerate() {
                let shift = mu * T::from_f(n as f64);
                for (k, &e) in sec.evals.iter().enumerate() {
                    if e - shift - best <= tol {
                        terms.push((n, k, T::one()));
                    } else {
                        break;
                    }
                }
            }
            let w = T::one() / T::from_f(terms.len() as f64);
            for t in &mut terms {
                t.2 = w;
            }
            Ok(ThermalEnsemble { terms })
        }
        Beta::Finite(b) => {
            if b <= T::zero() {
                return Err(Error::Model("β must be positive".into()));
            }
            let mut shift = T::infinity();
            for (n, sec) in spec.sectors.iter().enumerate() {
                for &e in &sec.evals {
                    let g = e - mu * T::from_f(n as f64);
                    if g < shift {
                        shift = g;
                    }
                }
            }
            let cutoff = T::from_f(SECTOR_CUTOFF);
            let mut terms = Vec::new();
            let mut z = T::zero();
            for (n, sec) in spec.sectors.iter().enumerate() {
                let mu_n = mu * T::from_f(n as f64);
                let sector_best = (-(b * (sec.evals[0] - mu_n - shift))).exp();
                if sector_best < cutoff {
                    continue;
                }
                for (k, &e) in sec.evals.iter().enumerate() {
                    let w = (-(b * (e - mu_n - shift))).exp();
                    if w > T::zero() {
                        terms.push((n, k, w));
                        z += w;
                    }
                }
            }
            for t in &mut terms {
                t.2 /= z;
            }
            Ok(ThermalEnsemble { terms })
        }
    }
}

/// Σ over the ensemble of a per-eigenstate evaluator.
fn expect_with<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    ens: &ThermalEnsemble<T>,
    f: impl Fn(&SectorSpectrum<T>, usize) -> T,
) -> T {
    let mut acc = T::zero();
    for &(n, k, w) in &ens.terms {
        acc += w * f(&spec.sectors[n], k);
    }
    acc
}

fn density_in_state<T: Scalar>(sec: &SectorSpectrum<T>, state: usize, site: usize) -> T {
    let mut acc = T::zero();
    let mask = 1u64 << site;
    for oi in 0..sec.basis.occupations.len() {
        if sec.basis.bits(oi) & mask == 0 {
            continue;
        }
        for si in 0..sec.basis.spin_dim {
            let idx = sec.basis.index(oi, si);
            let amp = sec.evecs[(idx, state)];
            acc += amp * amp;
        }
    }
    acc
}

fn spin_z_in_state<T: Scalar>(sec: &SectorSpectrum<T>, state: usize, site: usize) -> T {
    let mut acc = T::zero();
    for idx in 0..sec.basis.dim() {
        let (_, si) = sec.basis.split(idx);
        let amp = sec.evecs[(idx, state)];
        acc += amp * amp * T::from_f(sec.basis.spin_iz(si, site));
    }
    acc
}

fn spin_zz_in_state<T: Scalar>(
    sec: &SectorSpectrum<T>,
    state: usize,
    site_a: usize,
    site_b: usize,
) -> T {
    let mut acc = T::zero();
    for idx in 0..sec.basis.dim() {
        let (_, si) = sec.basis.split(idx);
        let amp = sec.evecs[(idx, state)];
        acc += amp
            * amp
            * T::from_f(sec.basis.spin_iz(si, site_a) * sec.basis.spin_iz(si, site_b));
    }
    acc
}

fn spin_x_in_state<T: Scalar>(sec: &SectorSpectrum<T>, state: usize, site: usize) -> T {
    // ⟨ψ| I^x |ψ⟩ with I^x = (I⁺ + I⁻)/2; sum the raising half twice
    let s = sec.basis.two_s as f64 / 2.0;
    let mut acc = T::zero();
    for idx in 0..sec.basis.dim() {
        let (oi, si) = sec.basis.split(idx);
        let amp = sec.evecs[(idx, state)];
        if amp == T::zero() {
            continue;
        }
        if let Some(up) = sec.basis.shift_level(si, site, true) {
            let m = sec.basis.spin_iz(si, site);
            let a = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
            let jdx = sec.basis.index(oi, up);
            acc += amp * sec.evecs[(jdx, state)] * T::from_f(a);
        }
    }
    acc
}

fn correlator_in_state<T: Scalar>(
    sec: &SectorSpectrum<T>,
    state: usize,
    site_i: usize,
    site_j: usize,
) -> T {
    if site_i == site_j {
        return density_in_state(sec, state, site_i);
    }
    // ⟨ψ| c_i† c_j |ψ⟩ with Jordan-Wigner signs
    let mut acc = T::zero();
    for oi in 0..sec.basis.occupations.len() {
        let bits = sec.basis.bits(oi);
        let Some((b1, s1)) = crate::ed::basis::annihilate(bits, site_j) else {
            continue;
        };
        let Some((b2, s2)) = crate::ed::basis::create(b1, site_i) else {
            continue;
        };
        let ro = sec.basis.rank_of(b2).expect("sector preserved");
        let sign = T::from_f((s1 * s2) as f64);
        for si in 0..sec.basis.spin_dim {
            let col = sec.basis.index(oi, si);
            let row = sec.basis.index(ro, si);
            acc += sign * sec.evecs[(row, state)] * sec.evecs[(col, state)];
        }
    }
    acc
}

pub fn thermal_site_density<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    ens: &ThermalEnsemble<T>,
) -> Vec<T> {
    (0..spec.n_sites())
        .map(|i| expect_with(spec, ens, |sec, k| density_in_state(sec, k, i)))
        .collect()
}

pub fn thermal_total_charge<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    ens: &ThermalEnsemble<T>,
) -> T {
    expect_with(spec, ens, |sec, _| T::from_f(sec.n_electrons as f64))
}

pub fn thermal_spin_z<T: Scalar>(spec: &ManyBodySpectrum<T>, ens: &ThermalEnsemble<T>) -> Vec<T> {
    (0..spec.n_sites())
        .map(|i| expect_with(spec, ens, |sec, k| spin_z_in_state(sec, k, i)))
        .collect()
}

pub fn thermal_spin_x<T: Scalar>(spec: &ManyBodySpectrum<T>, ens: &ThermalEnsemble<T>) -> Vec<T> {
    (0..spec.n_sites())
        .map(|i| expect_with(spec, ens, |sec, k| spin_x_in_state(sec, k, i)))
        .collect()
}

/// ⟨S_ref^z S_j^z⟩ for every j.
pub fn thermal_spin_zz_ref<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    ens: &ThermalEnsemble<T>,
    reference: usize,
) -> Vec<T> {
    (0..spec.n_sites())
        .map(|j| expect_with(spec, ens, |sec, k| spin_zz_in_state(sec, k, reference, j)))
        .collect()
}

/// ⟨c_i† c_j⟩ in the thermal state.
pub fn thermal_correlator<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    ens: &ThermalEnsemble<T>,
    i: usize,
    j: usize,
) -> T {
    expect_with(spec, ens, |sec, k| correlator_in_state(sec, k, i, j))
}

pub fn thermal_energy<T: Scalar>(spec: &ManyBodySpectrum<T>, ens: &ThermalEnsemble<T>) -> T {
    expect_with(spec, ens, |sec, k| sec.evals[k])
}

/// One row of the charge-occupation landscape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChargeProfileRow<T> {
    pub g_uev: T,
    pub h_z: T,
    pub mu: T,
    pub total_n: T,
    /// Staggered spin order parameter from the same thermal state.
    pub n_z: T,
}

/// Charge-occupation profile ⟨n⟩(g, h_z, μ) from grand-canonical ED.
/// The spectra are built at μ_site = 0; μ acts through the ensemble only.
pub fn total_charge_profile<T: Scalar>(
    graph: &LatticeGraph<T>,
    base: &ModelParams<T>,
    beta: Beta<T>,
    mu_grid: &[T],
    gh_grid: &[(T, T)],
    cfg: &EdConfig,
) -> Result<Vec<ChargeProfileRow<T>>> {
    if mu_grid.is_empty() || gh_grid.is_empty() {
        return Err(Error::Model("empty sweep grid".into()));
    }
    let rows: Result<Vec<Vec<ChargeProfileRow<T>>>> = gh_grid
        .par_iter()
        .map(|&(g_uev, h_z)| {
            let mut p = base.clone();
            p.g_uev = g_uev;
            p.h_z = h_z;
            p.mu = T::zero();
            p.mu_site = None;
            let coulomb = coulomb_matrix(graph, p.v0, p.lambda)?;
            let spec = full_spectrum(graph, &coulomb, &p, None, cfg)?;
            let s = p.spin_s();
            mu_grid
                .iter()
                .map(|&mu| {
                    let ens = thermal_ensemble(&spec, beta, mu)?;
                    let zz = thermal_spin_zz_ref(&spec, &ens, 0);
                    let n_z = crate::observables::neel_order_correlators(
                        &zz,
                        &graph.sublattice,
                        s,
                    );
                    Ok(ChargeProfileRow {
                        g_uev,
                        h_z,
                        mu,
                        total_n: thermal_total_charge(&spec, &ens),
                        n_z,
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}
