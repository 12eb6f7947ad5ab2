//! Sector-resolved sparse assembly of the lattice Hamiltonian
//!
//!   H = -t Σ_<ij> (c_i†c_j + h.c.) - Σ_i μ_i n_i
//!       - Σ_i (g n_i I_i^z + h_z I_i^z + h_x I_i^x) - Σ_i ε_i I_i^z
//!       + Σ_{i<j} V_ij n_i n_j.
//!
//! The Coulomb term assigns each unordered pair the energy V_ij once,
//! matching V0 = 1/(4πε0 ε_si) as a physical pair interaction.

use crate::ed::basis::{create, ManyBodyBasis};
use crate::ed::EdConfig;
use crate::error::{Error, Result};
use crate::lattice::{CoulombMatrix, LatticeGraph};
use crate::model::{ModelParams, SitePotentials};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Sparse real-symmetric matrix in column-major adjacency form.
#[derive(Debug, Clone)]
pub struct SparseSym<T> {
    pub dim: usize,
    /// cols[c] lists (row, value) of nonzero entries in column c.
    pub cols: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> SparseSym<T> {
    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::<T>::zeros(self.dim, self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r as usize, c)] += v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &DVector<T>, y: &mut DVector<T>) {
        y.fill(T::zero());
        for (c, col) in self.cols.iter().enumerate() {
            let xc = x[c];
            if xc == T::zero() {
                continue;
            }
            for &(r, v) in col {
                y[r as usize] += v * xc;
            }
        }
    }
}

/// Assemble the Hamiltonian of one electron-number sector.
pub fn build_sector_hamiltonian<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pots: &SitePotentials<T>,
    basis: &ManyBodyBasis,
    cfg: &EdConfig,
) -> Result<SparseSym<T>> {
    let n = graph.n_sites();
    if basis.n_sites != n {
        return Err(Error::Basis("basis/lattice size mismatch".into()));
    }
    let dim = basis.dim();
    if dim > cfg.dim_cap {
        return Err(Error::Basis(format!(
            "sector dimension {dim} exceeds the cap {}",
            cfg.dim_cap
        )));
    }
    let g = p.g_mev();
    let s_val = p.spin_s();
    let half = T::from_f(0.5);
    let n_occ = basis.occupations.len();
    let spin_dim = basis.spin_dim;

    let mut cols: Vec<Vec<(u32, T)>> = vec![Vec::new(); dim];

    // occupation-only energies (chemical potential + Coulomb), reused across
    // spin configurations
    let mut occ_energy = vec![T::zero(); n_occ];
    for (oi, &bits) in basis.occupations.iter().enumerate() {
        let mut e = T::zero();
        for i in 0..n {
            if bits & (1 << i) != 0 {
                e -= pots.mu[i];
                for j in (i + 1)..n {
                    if bits & (1 << j) != 0 {
                        e += coulomb.v[(i, j)];
                    }
                }
            }
        }
        occ_energy[oi] = e;
    }

    for oi in 0..n_occ {
        let bits = basis.occupations[oi];
        for si in 0..spin_dim {
            let col = basis.index(oi, si);

            // diagonal: occupation energy + spin terms
            let mut diag = occ_energy[oi];
            for i in 0..n {
                let m_i = T::from_f(basis.spin_iz(si, i));
                diag -= (p.h_z + pots.epsilon[i]) * m_i;
                if bits & (1 << i) != 0 {
                    diag -= g * m_i;
                }
            }
            if diag != T::zero() {
                cols[col].push((col as u32, diag));
            }

            // hopping -t (c_i† c_j + c_j† c_i)
            for &(i, j) in &graph.neighbor_pairs {
                for (from, to) in [(j, i), (i, j)] {
                    let fm = 1u64 << from;
                    let tm = 1u64 << to;
                    if bits & fm != 0 && bits & tm == 0 {
                        let (b1, s1) = crate::ed::basis::annihilate(bits, from).unwrap();
                        let (b2, s2) = create(b1, to).unwrap();
                        let row_occ = basis.rank_of(b2).expect("sector-preserving hop");
                        let row = basis.index(row_occ, si);
                        let sign = T::from_f((s1 * s2) as f64);
                        cols[col].push((row as u32, -p.t * sign));
                    }
                }
            }

            // transverse field -h_x I^x = -(h_x/2)(I⁺ + I⁻)
            if p.h_x != T::zero() {
                for i in 0..n {
                    let m_i = T::from_f(basis.spin_iz(si, i));
                    if let Some(up) = basis.shift_level(si, i, true) {
                        // ⟨m+1| I⁺ |m⟩ = sqrt(S(S+1) - m(m+1))
                        let amp = (s_val * (s_val + T::one()) - m_i * (m_i + T::one())).sqrt();
                        let row = basis.index(oi, up);
                        cols[col].push((row as u32, -p.h_x * half * amp));
                    }
                    if let Some(down) = basis.shift_level(si, i, false) {
                        let amp = (s_val * (s_val + T::one()) - m_i * (m_i - T::one())).sqrt();
                        let row = basis.index(oi, down);
                        cols[col].push((row as u32, -p.h_x * half * amp));
                    }
                }
            }
        }
    }
    Ok(SparseSym { dim, cols })
}
