//! Occupation-number ⊗ spin-configuration basis for one electron-number
//! sector.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Basis of the n-electron sector on N sites with spin-S moments.
///
/// States are indexed as `occ_index * spin_dim + spin_index`; the spin
/// configuration is a base-(2S+1) integer whose digit i (least significant =
/// site 0) is the level ℓ_i ∈ 0..=2S, with I_i^z eigenvalue ℓ_i - S.
#[derive(Debug, Clone)]
pub struct ManyBodyBasis {
    pub n_sites: usize,
    pub two_s: u32,
    pub n_electrons: usize,
    /// All bitstrings with `n_electrons` bits set, ascending numeric order.
    pub occupations: Vec<u64>,
    occ_rank: HashMap<u64, u32>,
    /// (2S+1)^N
    pub spin_dim: usize,
    /// Per-site stride in the spin index: (2S+1)^i.
    strides: Vec<usize>,
}

impl ManyBodyBasis {
    pub fn new(n_sites: usize, two_s: u32, n_electrons: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > 30 {
            return Err(Error::Basis(format!(
                "N = {n_sites} outside the supported 1..=30 range"
            )));
        }
        if n_electrons > n_sites {
            return Err(Error::Basis(format!(
                "cannot place {n_electrons} electrons on {n_sites} sites"
            )));
        }
        let per_site = (two_s + 1) as usize;
        let mut spin_dim: usize = 1;
        let mut strides = Vec::with_capacity(n_sites);
        for _ in 0..n_sites {
            strides.push(spin_dim);
            spin_dim = spin_dim.checked_mul(per_site).ok_or_else(|| {
                Error::Basis("spin space dimension overflows usize".into())
            })?;
        }
        let occupations = enumerate_bitstrings(n_sites, n_electrons);
        let occ_rank = occupations
            .iter()
            .enumerate()
            .map(|(r, &b)| (b, r as u32))
            .collect();
        Ok(ManyBodyBasis {
            n_sites,
            two_s,
            n_electrons,
            occupations,
            occ_rank,
            spin_dim,
            strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.occupations.len() * self.spin_dim
    }

    pub fn index(&self, occ_index: usize, spin_index: usize) -> usize {
        occ_index * self.spin_dim + spin_index
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.spin_dim, index % self.spin_dim)
    }

    pub fn bits(&self, occ_index: usize) -> u64 {
        self.occupations[occ_index]
    }

    pub fn rank_of(&self, bits: u64) -> Option<usize> {
        self.occ_rank.get(&bits).map(|&r| r as usize)
    }

    /// Spin level ℓ ∈ 0..=2S of `site` in the configuration `spin_index`.
    pub fn spin_level(&self, spin_index: usize, site: usize) -> u32 {
        ((spin_index / self.strides[site]) % (self.two_s as usize + 1)) as u32
    }

    /// I^z eigenvalue ℓ - S of `site`.
    pub fn spin_iz(&self, spin_index: usize, site: usize) -> f64 {
        self.spin_level(spin_index, site) as f64 - self.two_s as f64 / 2.0
    }

    /// Spin index with the level of `site` shifted by ±1; None at the ladder ends.
    pub fn shift_level(&self, spin_index: usize, site: usize, up: bool) -> Option<usize> {
        let level = self.spin_level(spin_index, site);
        if up {
            if level == self.two_s {
                return None;
            }
            Some(spin_index + self.strides[site])
        } else {
            if level == 0 {
                return None;
            }
            Some(spin_index - self.strides[site])
        }
    }
}

/// All N-bit words with exactly k bits set, ascending (Gosper's hack).
fn enumerate_bitstrings(n_sites: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let limit: u64 = 1 << n_sites;
    let mut out = Vec::new();
    let mut v: u64 = (1 << k) - 1;
    while v < limit {
        out.push(v);
        let t = v | (v - 1);
        v = (t + 1) | (((!t & t.wrapping_add(1)) - 1) >> (v.trailing_zeros() + 1));
    }
    out
}

/// Apply c_site† to a bitstring: Some((new_bits, sign)) or None if occupied.
/// Sign is the Jordan-Wigner parity of occupied sites below `site`.
pub fn create(bits: u64, site: usize) -> Option<(u64, i8)> {
    let mask = 1u64 << site;
    if bits & mask != 0 {
        return None;
    }
    let below = bits & (mask - 1);
    let sign = if below.count_ones() % 2 == 0 { 1 } else { -1 };
    Some((bits | mask, sign))
}

/// Apply c_site to a bitstring: Some((new_bits, sign)) or None if empty.
pub fn annihilate(bits: u64, site: usize) -> Option<(u64, i8)> {
    let mask = 1u64 << site;
    if bits & mask == 0 {
        return None;
    }
    let below = bits & (mask - 1);
    let sign = if below.count_ones() % 2 == 0 { 1 } else { -1 };
    Some((bits & !mask, sign))
}
