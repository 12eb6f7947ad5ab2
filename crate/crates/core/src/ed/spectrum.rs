//! Sector-resolved spectra, ground states, and creation-operator matrix
//! elements between adjacent electron-number sectors.

use crate::ed::basis::{create, ManyBodyBasis};
use crate::ed::hamiltonian::build_sector_hamiltonian;
use crate::ed::{EdConfig, lowest_eigenpair};
use crate::error::{Error, Result};
use crate::lattice::{CoulombMatrix, LatticeGraph};
use crate::linalg::sorted_symmetric_eigen;
use crate::model::{ModelParams, PinningPattern, SitePotentials};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Full dense spectrum of one electron-number sector.
#[derive(Debug, Clone)]
pub struct SectorSpectrum<T: Scalar> {
    pub n_electrons: usize,
    pub basis: ManyBodyBasis,
    /// Eigenvalues ascending, meV.
    pub evals: Vec<T>,
    /// Eigenvectors as columns, matching `evals`.
    pub evecs: DMatrix<T>,
}

impl<T: Scalar> SectorSpectrum<T> {
    pub fn dim(&self) -> usize {
        self.evals.len()
    }
}

/// Spectra of every sector 0..=N plus the model context they were built from.
#[derive(Debug, Clone)]
pub struct ManyBodySpectrum<T: Scalar> {
    pub sectors: Vec<SectorSpectrum<T>>,
    pub degeneracy_tol: f64,
}

impl<T: Scalar> ManyBodySpectrum<T> {
    pub fn n_sites(&self) -> usize {
        self.sectors.len() - 1
    }

    /// ⟨Ψ_α^{(n)}| c_site† |Ψ_{α'}^{(n-1)}⟩ for all α, α'.
    pub fn creation_elements(&self, n: usize, site: usize) -> DMatrix<T> {
        let upper = &self.sectors[n];
        let lower = &self.sectors[n - 1];
        // sparse creation operator in the basis, applied to the lower sector
        let mut applied = DMatrix::<T>::zeros(upper.dim(), lower.dim());
        for (oi, &bits) in lower.basis.occupations.iter().enumerate() {
            if let Some((new_bits, sign)) = create(bits, site) {
                let ro = upper
                    .basis
                    .rank_of(new_bits)
                    .expect("creation lands in the n-electron sector");
                let sgn = T::from_f(sign as f64);
                for si in 0..lower.basis.spin_dim {
                    let col = lower.basis.index(oi, si);
                    let row = upper.basis.index(ro, si);
                    for k in 0..lower.dim() {
                        applied[(row, k)] += sgn * lower.evecs[(col, k)];
                    }
                }
            }
        }
        upper.evecs.transpose() * applied
    }
}

/// Diagonalize every sector densely. Errors when a sector exceeds the dense
/// cutoff; ground states of large sectors go through
/// [`ground_state_of_sector`] instead.
pub fn full_spectrum<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    cfg: &EdConfig,
) -> Result<ManyBodySpectrum<T>> {
    let pots = crate::model::site_potentials(p, graph, pinning)?;
    let n = graph.n_sites();
    let sectors: Result<Vec<SectorSpectrum<T>>> = (0..=n)
        .into_par_iter()
        .map(|ne| diagonalize_sector(graph, coulomb, p, &pots, ne, cfg))
        .collect();
    Ok(ManyBodySpectrum {
        sectors: sectors?,
        degeneracy_tol: cfg.degeneracy_tol,
    })
}

fn diagonalize_sector<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pots: &SitePotentials<T>,
    n_electrons: usize,
    cfg: &EdConfig,
) -> Result<SectorSpectrum<T>> {
    let basis = ManyBodyBasis::new(graph.n_sites(), p.two_s, n_electrons)?;
    if basis.dim() > cfg.dense_cutoff {
        return Err(Error::Eigen(format!(
            "sector n = {n_electrons} has dimension {} > dense cutoff {}; full spectra \
             are only available densely",
            basis.dim(),
            cfg.dense_cutoff
        )));
    }
    let h = build_sector_hamiltonian(graph, coulomb, p, pots, &basis, cfg)?;
    let dense = h.to_dense();
    debug_assert!(crate::linalg::asymmetry(&dense).to_f() < 1e-12);
    let (evals, evecs) = sorted_symmetric_eigen(&dense);
    Ok(SectorSpectrum { n_electrons, basis, evals, evecs })
}

/// Lowest eigenpair of one sector; dense below the cutoff, Lanczos above.
pub fn ground_state_of_sector<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    n_electrons: usize,
    cfg: &EdConfig,
) -> Result<(T, DVector<T>, ManyBodyBasis)> {
    let pots = crate::model::site_potentials(p, graph, pinning)?;
    let basis = ManyBodyBasis::new(graph.n_sites(), p.two_s, n_electrons)?;
    let h = build_sector_hamiltonian(graph, coulomb, p, &pots, &basis, cfg)?;
    if basis.dim() <= cfg.dense_cutoff {
        let (evals, evecs) = sorted_symmetric_eigen(&h.to_dense());
        Ok((evals[0], evecs.column(0).into_owned(), basis))
    } else {
        let mv = move |x: &DVector<T>, y: &mut DVector<T>| h.matvec(x, y);
        let (lam, vec) = lowest_eigenpair(basis.dim(), &mv, 400, T::from_f(1e-10), 7)?;
        Ok((lam, vec, basis))
    }
}

/// Ground level of a sector spectrum with its degenerate manifold.
#[derive(Debug, Clone)]
pub struct GroundState<T> {
    pub energy: T,
    /// Indices of all states within the degeneracy tolerance of the bottom.
    pub states: Vec<usize>,
    pub degenerate: bool,
}

pub fn ground_state<T: Scalar>(sector: &SectorSpectrum<T>, degeneracy_tol: f64) -> GroundState<T> {
    let e0 = sector.evals[0];
    let tol = T::from_f(degeneracy_tol) * e0.abs().max(T::one());
    let states: Vec<usize> = sector
        .evals
        .iter()
        .enumerate()
        .take_while(|(_, &e)| e - e0 <= tol)
        .map(|(i, _)| i)
        .collect();
    GroundState {
        energy: e0,
        degenerate: states.len() > 1,
        states,
    }
}

/// Serializable spectrum dump: per-sector eigenvalues plus requested
/// creation matrix elements, enough to re-run conductance sweeps without
/// rediagonalizing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub n_sites: usize,
    pub two_s: u32,
    pub sector_evals: Vec<Vec<f64>>,
    /// (site, n) -> row-major matrix of ⟨n|c_site†|n-1⟩ elements.
    pub creation_elements: Vec<CreationBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreationBlock {
    pub site: usize,
    pub n_upper: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl SpectrumDump {
    pub fn from_spectrum<T: Scalar>(spec: &ManyBodySpectrum<T>, sites: &[usize]) -> Self {
        let mut blocks = Vec::new();
        for &site in sites {
            for n in 1..=spec.n_sites() {
                let m = spec.creation_elements(n, site);
                blocks.push(CreationBlock {
                    site,
                    n_upper: n,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    data: m.iter().map(|v| v.to_f()).collect(),
                });
            }
        }
        SpectrumDump {
            n_sites: spec.n_sites(),
            two_s: spec.sectors[0].basis.two_s,
            sector_evals: spec
                .sectors
                .iter()
                .map(|s| s.evals.iter().map(|e| e.to_f()).collect())
                .collect(),
            creation_elements: blocks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum dump serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Basis(format!("spectrum dump parse: {e}")))
    }
}
