//! Linear-response conductance of the dopant island coupled to left/right
//! probes, in the sequential-tunneling (resonant transport) regime.
//!
//! Rates follow Fermi's golden rule through the creation-operator matrix
//! elements at the probe columns,
//!   Γ^{L}_{αα'} = Γ Σ_{i∈left} |⟨Ψ_α^{n}| c_i† |Ψ_{α'}^{n-1}⟩|²,
//! the island occupies its own thermal state P ∝ e^{-β_island(E - nμ)}, and
//!   G = G_{0,T} Σ Q_{αα'} P_α [1 - f_FD(E_α^n - E_{α'}^{n-1} - μ)]
//! with Q = Γ^L Γ^R/(Γ^L + Γ^R) and the Fermi factor at the reservoir
//! temperature. G_{0,T} = e²/(k_B T_r) is the conductance unit; curves are
//! reported both raw (units of Γ·G_{0,T}/e² style prefactors dropped) and
//! normalized to their grid maximum.

use crate::beta_from_mk;
use crate::ed::{full_spectrum, EdConfig, ManyBodySpectrum};
use crate::error::{Error, Result};
use crate::lattice::{coulomb_matrix, LatticeGraph};
use crate::model::ModelParams;
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Probe attachment and temperatures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeSetup<T> {
    pub left_sites: Vec<usize>,
    pub right_sites: Vec<usize>,
    /// Bare rate scale Γ = 2πC² (arbitrary energy units; normalized curves
    /// are Γ-independent).
    pub gamma: T,
    /// Reservoir temperature, mK.
    pub t_reservoir_mk: T,
    /// Island temperature, mK.
    pub t_island_mk: T,
}

impl<T: Scalar> ProbeSetup<T> {
    pub fn new(
        left_sites: Vec<usize>,
        right_sites: Vec<usize>,
        gamma: T,
        t_reservoir_mk: T,
        t_island_mk: T,
    ) -> Result<Self> {
        if left_sites.is_empty() || right_sites.is_empty() {
            return Err(Error::Transport("probe site lists must be non-empty".into()));
        }
        if left_sites.iter().any(|s| right_sites.contains(s)) {
            return Err(Error::Transport("probe site lists must be disjoint".into()));
        }
        if gamma <= T::zero() {
            return Err(Error::Transport("rate scale Γ must be positive".into()));
        }
        if t_reservoir_mk <= T::zero() || t_island_mk <= T::zero() {
            return Err(Error::Transport("temperatures must be positive".into()));
        }
        Ok(ProbeSetup { left_sites, right_sites, gamma, t_reservoir_mk, t_island_mk })
    }

    /// Attach to the leftmost/rightmost columns of the lattice.
    pub fn columns<U: Scalar>(
        graph: &LatticeGraph<U>,
        gamma: T,
        t_reservoir_mk: T,
        t_island_mk: T,
    ) -> Result<Self> {
        ProbeSetup::new(
            graph.leftmost_sites(),
            graph.rightmost_sites(),
            gamma,
            t_reservoir_mk,
            t_island_mk,
        )
    }
}

/// Golden-rule rate tensors for both probes, indexed by the upper sector n.
#[derive(Debug, Clone)]
pub struct RateTensors<T: Scalar> {
    /// left[n-1] has shape (dim_n, dim_{n-1}).
    pub left: Vec<DMatrix<T>>,
    pub right: Vec<DMatrix<T>>,
}

pub fn tunneling_rates<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    probe: &ProbeSetup<T>,
) -> Result<RateTensors<T>> {
    let n_sites = spec.n_sites();
    for &s in probe.left_sites.iter().chain(&probe.right_sites) {
        if s >= n_sites {
            return Err(Error::Transport(format!("probe site {s} out of range")));
        }
    }
    let build = |sites: &[usize]| -> Vec<DMatrix<T>> {
        (1..=n_sites)
            .map(|n| {
                let dim_up = spec.sectors[n].dim();
                let dim_lo = spec.sectors[n - 1].dim();
                let mut rate = DMatrix::<T>::zeros(dim_up, dim_lo);
                for &site in sites {
                    let m = spec.creation_elements(n, site);
                    for r in 0..dim_up {
                        for c in 0..dim_lo {
                            rate[(r, c)] += probe.gamma * m[(r, c)] * m[(r, c)];
                        }
                    }
                }
                rate
            })
            .collect()
    };
    Ok(RateTensors {
        left: build(&probe.left_sites),
        right: build(&probe.right_sites),
    })
}

/// Stationary island weights P[n][α] ∝ e^{-β(E_α^n - nμ)}, normalized over
/// all sectors and levels (log-sum-exp shifted).
pub fn stationary_weights<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    beta_island: T,
    mu: T,
) -> Result<Vec<Vec<T>>> {
    if beta_island <= T::zero() {
        return Err(Error::Transport("island β must be positive".into()));
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
    let mut weights: Vec<Vec<T>> = Vec::with_capacity(spec.sectors.len());
    let mut z = T::zero();
    for (n, sec) in spec.sectors.iter().enumerate() {
        let mu_n = mu * T::from_f(n as f64);
        let w: Vec<T> = sec
            .evals
            .iter()
            .map(|&e| (-(beta_island * (e - mu_n - shift))).exp())
            .collect();
        z += w.iter().fold(T::zero(), |a, &b| a + b);
        weights.push(w);
    }
    for w in &mut weights {
        for x in w.iter_mut() {
            *x /= z;
        }
    }
    Ok(weights)
}

fn fermi_dirac<T: Scalar>(e_minus_mu: T, beta: T) -> T {
    let x = beta * e_minus_mu;
    let lim = T::from_f(700.0);
    if x > lim {
        T::zero()
    } else if x < -lim {
        T::one()
    } else {
        T::one() / (T::one() + x.exp())
    }
}

/// Raw linear conductance (in units of Γ·G_{0,T}) at one chemical potential.
pub fn linear_conductance<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    rates: &RateTensors<T>,
    probe: &ProbeSetup<T>,
    mu: T,
) -> Result<T> {
    let beta_island = beta_from_mk(probe.t_island_mk);
    let beta_res = beta_from_mk(probe.t_reservoir_mk);
    let weights = stationary_weights(spec, beta_island, mu)?;
    // sector skip below the weight cutoff keeps the sum exact to 1e-14
    let cutoff = T::from_f(1e-14);
    let mut g = T::zero();
    for n in 1..=spec.n_sites() {
        let upper = &spec.sectors[n];
        let lower = &spec.sectors[n - 1];
        let p_max = weights[n].iter().fold(T::zero(), |a, &b| a.max(b));
        if p_max < cutoff {
            continue;
        }
        let gl = &rates.left[n - 1];
        let gr = &rates.right[n - 1];
        for alpha in 0..upper.dim() {
            let p = weights[n][alpha];
            if p < cutoff {
                continue;
            }
            for alpha_p in 0..lower.dim() {
                let l = gl[(alpha, alpha_p)];
                let r = gr[(alpha, alpha_p)];
                let denom = l + r;
                if denom <= T::zero() {
                    continue;
                }
                let q = l * r / denom;
                let de = upper.evals[alpha] - lower.evals[alpha_p] - mu;
                g += q * p * (T::one() - fermi_dirac(de, beta_res));
            }
        }
    }
    Ok(g)
}

/// Ground-state addition energies E_0^n - E_0^{n-1}; conductance peaks can
/// only sit near these at low temperature.
pub fn addition_energies<T: Scalar>(spec: &ManyBodySpectrum<T>) -> Vec<T> {
    (1..=spec.n_sites())
        .map(|n| spec.sectors[n].evals[0] - spec.sectors[n - 1].evals[0])
        .collect()
}

/// Conductance from an exported spectrum dump (eigenvalues plus creation
/// matrix elements), so sweeps can re-run without rediagonalizing. The dump
/// must carry matrix elements for every probe site.
pub fn conductance_from_dump<T: Scalar>(
    dump: &crate::ed::SpectrumDump,
    probe: &ProbeSetup<T>,
    mus: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let n_sites = dump.n_sites;
    let evals: Vec<Vec<T>> = dump
        .sector_evals
        .iter()
        .map(|v| v.iter().map(|&x| T::from_f(x)).collect())
        .collect();
    let block = |site: usize, n_upper: usize| -> Result<&crate::ed::CreationBlock> {
        dump.creation_elements
            .iter()
            .find(|b| b.site == site && b.n_upper == n_upper)
            .ok_or_else(|| {
                Error::Transport(format!(
                    "dump lacks creation elements for site {site}, sector {n_upper}"
                ))
            })
    };
    let rates_for = |sites: &[usize], n_upper: usize| -> Result<DMatrix<T>> {
        let rows = evals[n_upper].len();
        let cols = evals[n_upper - 1].len();
        let mut rate = DMatrix::<T>::zeros(rows, cols);
        for &site in sites {
            let b = block(site, n_upper)?;
            for r in 0..rows {
                for c in 0..cols {
                    let m = T::from_f(b.data[c * rows + r]);
                    rate[(r, c)] += probe.gamma * m * m;
                }
            }
        }
        Ok(rate)
    };
    let beta_island = beta_from_mk(probe.t_island_mk);
    let beta_res = beta_from_mk(probe.t_reservoir_mk);
    // stationary weights over the dumped spectrum
    let weights_at = |mu: T| -> Vec<Vec<T>> {
        let mut shift = T::infinity();
        for (n, sec) in evals.iter().enumerate() {
            for &e in sec {
                let g = e - mu * T::from_f(n as f64);
                if g < shift {
                    shift = g;
                }
            }
        }
        let mut w: Vec<Vec<T>> = evals
            .iter()
            .enumerate()
            .map(|(n, sec)| {
                sec.iter()
                    .map(|&e| {
                        (-(beta_island * (e - mu * T::from_f(n as f64) - shift))).exp()
                    })
                    .collect()
            })
            .collect();
        let z = w.iter().flatten().fold(T::zero(), |a, &b| a + b);
        for sec in &mut w {
            for x in sec.iter_mut() {
                *x /= z;
            }
        }
        w
    };
    let left: Result<Vec<DMatrix<T>>> =
        (1..=n_sites).map(|n| rates_for(&probe.left_sites, n)).collect();
    let right: Result<Vec<DMatrix<T>>> =
        (1..=n_sites).map(|n| rates_for(&probe.right_sites, n)).collect();
    let (left, right) = (left?, right?);
    let cutoff = T::from_f(1e-14);
    let mut g_raw = Vec::with_capacity(mus.len());
    for &mu in mus {
        let weights = weights_at(mu);
        let mut g = T::zero();
        for n in 1..=n_sites {
            let p_max = weights[n].iter().fold(T::zero(), |a, &b| a.max(b));
            if p_max < cutoff {
                continue;
            }
            for alpha in 0..evals[n].len() {
                let p = weights[n][alpha];
                if p < cutoff {
                    continue;
                }
                for alpha_p in 0..evals[n - 1].len() {
                    let l = left[n - 1][(alpha, alpha_p)];
                    let r = right[n - 1][(alpha, alpha_p)];
                    let denom = l + r;
                    if denom <= T::zero() {
                        continue;
                    }
                    let de = evals[n][alpha] - evals[n - 1][alpha_p] - mu;
                    g += l * r / denom * p * (T::one() - fermi_dirac(de, beta_res));
                }
            }
        }
        g_raw.push(g);
    }
    let max = g_raw.iter().fold(T::zero(), |a, &b| a.max(b));
    let g_norm = if max > T::zero() {
        g_raw.iter().map(|&x| x / max).collect()
    } else {
        vec![T::zero(); g_raw.len()]
    };
    Ok((g_raw, g_norm))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakInfo<T> {
    pub mu: T,
    pub height_normalized: T,
    /// Full width at half maximum when both crossings fit the grid.
    pub half_width: Option<T>,
}

/// A conductance-vs-μ curve with peak metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConductanceCurve<T> {
    pub mus: Vec<T>,
    pub g_raw: Vec<T>,
    pub g_normalized: Vec<T>,
    pub peaks: Vec<PeakInfo<T>>,
    pub h_z: T,
    pub g_uev: T,
    pub t_reservoir_mk: T,
    pub t_island_mk: T,
}

/// Local maxima above 1% of the global maximum, with interpolated FWHM.
pub fn find_peaks<T: Scalar>(mus: &[T], g_norm: &[T]) -> Vec<PeakInfo<T>> {
    let threshold = T::from_f(0.01);
    let mut peaks = Vec::new();
    for i in 1..g_norm.len().saturating_sub(1) {
        if g_norm[i] > g_norm[i - 1] && g_norm[i] >= g_norm[i + 1] && g_norm[i] > threshold {
            let half = g_norm[i] * T::from_f(0.5);
            let mut left = None;
            for j in (0..i).rev() {
                if g_norm[j] <= half {
                    let frac = (half - g_norm[j]) / (g_norm[j + 1] - g_norm[j]);
                    left = Some(mus[j] + frac * (mus[j + 1] - mus[j]));
                    break;
                }
            }
            let mut right = None;
            for j in (i + 1)..g_norm.len() {
                if g_norm[j] <= half {
                    let frac = (g_norm[j - 1] - half) / (g_norm[j - 1] - g_norm[j]);
                    right = Some(mus[j - 1] + frac * (mus[j] - mus[j - 1]));
                    break;
                }
            }
            peaks.push(PeakInfo {
                mu: mus[i],
                height_normalized: g_norm[i],
                half_width: match (left, right) {
                    (Some(l), Some(r)) => Some(r - l),
                    _ => None,
                },
            });
        }
    }
    peaks
}

/// Evaluate one curve over a μ grid from a prebuilt spectrum.
pub fn conductance_curve<T: Scalar>(
    spec: &ManyBodySpectrum<T>,
    probe: &ProbeSetup<T>,
    mus: &[T],
    h_z: T,
    g_uev: T,
) -> Result<ConductanceCurve<T>> {
    let rates = tunneling_rates(spec, probe)?;
    let g_raw: Result<Vec<T>> = mus
        .iter()
        .map(|&mu| linear_conductance(spec, &rates, probe, mu))
        .collect();
    let g_raw = g_raw?;
    let max = g_raw.iter().fold(T::zero(), |a, &b| a.max(b));
    let g_normalized: Vec<T> = if max > T::zero() {
        g_raw.iter().map(|&x| x / max).collect()
    } else {
        vec![T::zero(); g_raw.len()]
    };
    let peaks = find_peaks(mus, &g_normalized);
    Ok(ConductanceCurve {
        mus: mus.to_vec(),
        g_raw,
        g_normalized,
        peaks,
        h_z,
        g_uev,
        t_reservoir_mk: probe.t_reservoir_mk,
        t_island_mk: probe.t_island_mk,
    })
}

/// Per-h_z conductance curves; the spectrum is rebuilt for every field value
/// with μ_site = 0 so that μ acts through the ensemble alone.
pub fn conductance_sweep<T: Scalar>(
    graph: &LatticeGraph<T>,
    base: &ModelParams<T>,
    probe: &ProbeSetup<T>,
    mus: &[T],
    h_z_values: &[T],
    cfg: &EdConfig,
) -> Result<Vec<ConductanceCurve<T>>> {
    h_z_values
        .par_iter()
        .map(|&h_z| {
            let mut p = base.clone();
            p.h_z = h_z;
            p.mu = T::zero();
            p.mu_site = None;
            let coulomb = coulomb_matrix(graph, p.v0, p.lambda)?;
            let spec = full_spectrum(graph, &coulomb, &p, None, cfg)?;
            conductance_curve(&spec, probe, mus, h_z, p.g_uev)
        })
        .collect()
}
