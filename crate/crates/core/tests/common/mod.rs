//! Independent dense full-Hilbert-space oracle for small clusters.
//!
//! Everything here is built from explicit dense operator matrices on the
//! full (unblocked) space: fermion modes with Jordan-Wigner strings times a
//! base-(2S+1) spin register. No code is shared with the sector-blocked
//! implementation under test.

#![allow(dead_code)]

use donorsim_core::lattice::LatticeGraph;
use donorsim_core::model::{Beta, ModelParams, SitePotentials};
use nalgebra::DMatrix;

pub struct DenseOracle {
    pub n_sites: usize,
    pub two_s: u32,
    pub dim_f: usize,
    pub dim_s: usize,
    /// Fermion annihilation operators on the fermion factor.
    pub c_ops: Vec<DMatrix<f64>>,
    /// Spin operators on the spin factor.
    pub iz_ops: Vec<DMatrix<f64>>,
    pub ix_ops: Vec<DMatrix<f64>>,
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

impl DenseOracle {
    pub fn new(n_sites: usize, two_s: u32) -> Self {
        assert!(n_sites <= 4, "oracle is for tiny clusters");
        let dim_f = 1usize << n_sites;
        let per = (two_s + 1) as usize;
        let dim_s = per.pow(n_sites as u32);
        // fermion annihilation with the Jordan-Wigner parity of occupied
        // modes below the site
        let mut c_ops = Vec::new();
        for site in 0..n_sites {
            let mut c = DMatrix::<f64>::zeros(dim_f, dim_f);
            let mask = 1usize << site;
            for col in 0..dim_f {
                if col & mask != 0 {
                    let row = col & !mask;
                    let below = (col & (mask - 1)).count_ones();
                    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                    c[(row, col)] = sign;
                }
            }
            c_ops.push(c);
        }
        // spin-S ladder on each register digit
        let s = two_s as f64 / 2.0;
        let mut iz_site = DMatrix::<f64>::zeros(per, per);
        let mut ip_site = DMatrix::<f64>::zeros(per, per);
        for level in 0..per {
            let m = level as f64 - s;
            iz_site[(level, level)] = m;
            if level + 1 < per {
                ip_site[(level + 1, level)] = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
            }
        }
        let ix_site = (&ip_site + ip_site.transpose()) * 0.5;
        let mut iz_ops = Vec::new();
        let mut ix_ops = Vec::new();
        for site in 0..n_sites {
            // digit `site` is least significant: index = Σ level_i per^i
            let left = per.pow((n_sites - 1 - site) as u32);
            let right = per.pow(site as u32);
            let lift = |op: &DMatrix<f64>| {
                kron(
                    &kron(&DMatrix::identity(left, left), op),
                    &DMatrix::identity(right, right),
                )
            };
            iz_ops.push(lift(&iz_site));
            ix_ops.push(lift(&ix_site));
        }
        DenseOracle { n_sites, two_s, dim_f, dim_s, c_ops, iz_ops, ix_ops }
    }

    pub fn dim(&self) -> usize {
        self.dim_f * self.dim_s
    }

    fn lift_f(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        kron(op, &DMatrix::identity(self.dim_s, self.dim_s))
    }

    fn lift_s(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        kron(&DMatrix::identity(self.dim_f, self.dim_f), op)
    }

    pub fn number_op(&self, site: usize) -> DMatrix<f64> {
        self.lift_f(&(self.c_ops[site].transpose() * &self.c_ops[site]))
    }

    pub fn total_number(&self) -> DMatrix<f64> {
        let mut n = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.n_sites {
            n += self.number_op(i);
        }
        n
    }

    pub fn correlator_op(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.lift_f(&(self.c_ops[i].transpose() * &self.c_ops[j]))
    }

    pub fn spin_z(&self, site: usize) -> DMatrix<f64> {
        self.lift_s(&self.iz_ops[site])
    }

    pub fn spin_x(&self, site: usize) -> DMatrix<f64> {
        self.lift_s(&self.ix_ops[site])
    }

    /// Full-space Hamiltonian assembled purely by dense operator algebra.
    pub fn hamiltonian(
        &self,
        graph: &LatticeGraph<f64>,
        coulomb: &DMatrix<f64>,
        p: &ModelParams<f64>,
        pots: &SitePotentials<f64>,
    ) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::<f64>::zeros(d, d);
        for &(i, j) in &graph.neighbor_pairs {
            let hop = self.c_ops[i].transpose() * &self.c_ops[j]
                + self.c_ops[j].transpose() * &self.c_ops[i];
            h += self.lift_f(&hop) * (-p.t);
        }
        let g = p.g_mev();
        for i in 0..self.n_sites {
            let n_i = self.number_op(i);
            h -= &n_i * pots.mu[i];
            h -= self.number_op(i) * self.spin_z(i) * g;
            h -= self.spin_z(i) * (p.h_z + pots.epsilon[i]);
            h -= self.spin_x(i) * p.h_x;
        }
        for i in 0..self.n_sites {
            for j in (i + 1)..self.n_sites {
                h += self.number_op(i) * self.number_op(j) * coulomb[(i, j)];
            }
        }
        h
    }

    /// Grand-canonical trace ⟨O⟩ = Tr[O e^{-β(H-μN)}]/Tr[e^{-β(H-μN)}] by
    /// full diagonalization.
    pub fn thermal_expectation(
        &self,
        h: &DMatrix<f64>,
        beta: Beta<f64>,
        mu: f64,
        obs: &DMatrix<f64>,
    ) -> f64 {
        let grand = h - self.total_number() * mu;
        let eig = grand.clone().symmetric_eigen();
        let evals = &eig.eigenvalues;
        let evecs = &eig.eigenvectors;
        let d = self.dim();
        match beta {
            Beta::Finite(b) => {
                let shift = evals.iter().cloned().fold(f64::INFINITY, f64::min);
                let mut z = 0.0;
                let mut acc = 0.0;
                for k in 0..d {
                    let w = (-b * (evals[k] - shift)).exp();
                    let col = evecs.column(k);
                    let val = (col.transpose() * obs * col)[(0, 0)];
                    z += w;
                    acc += w * val;
                }
                acc / z
            }
            Beta::Infinite => {
                let e0 = evals.iter().cloned().fold(f64::INFINITY, f64::min);
                let tol = 1e-9 * e0.abs().max(1.0);
                let mut count = 0.0;
                let mut acc = 0.0;
                for k in 0..d {
                    if evals[k] - e0 <= tol {
                        let col = evecs.column(k);
                        acc += (col.transpose() * obs * col)[(0, 0)];
                        count += 1.0;
                    }
                }
                acc / count
            }
        }
    }
}

/// Spearman rank correlation of y against x.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..x.len() {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx).powi(2);
        dy += (ry[i] - my).powi(2);
    }
    num / (dx * dy).sqrt()
}
