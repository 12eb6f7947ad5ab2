//! Lattice geometries, neighbor relations, sublattice labels, and the
//! screened Coulomb interaction matrix.
//!
//! Supported geometries: 1D chain, 2D square (row-major site order), and
//! honeycomb (unit-cell-major order, A before B within each cell, basis
//! vectors a1 = (a/2)(3, √3), a2 = (a/2)(3, -√3)).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Chain,
    Square,
    Honeycomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    /// Néel parity δ_i = ±1.
    pub fn parity<T: Scalar>(self) -> T {
        match self {
            Sublattice::A => T::one(),
            Sublattice::B => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LatticeGraph<T: Scalar> {
    pub geometry: Geometry,
    pub boundary: Boundary,
    pub n_x: usize,
    pub n_y: usize,
    /// Lattice constant in nm (nearest-neighbor distance).
    pub lattice_constant: T,
    /// Per-site position in nm.
    pub positions: Vec<[T; 2]>,
    pub sublattice: Vec<Sublattice>,
    /// Unordered nearest-neighbor pairs, each listed once with i < j.
    pub neighbor_pairs: Vec<(usize, usize)>,
    /// Periodic cell vectors used for minimum-image distances (empty when open).
    cell_vectors: Vec<[T; 2]>,
}

impl<T: Scalar> LatticeGraph<T> {
    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn dimension(&self) -> usize {
        match self.geometry {
            Geometry::Chain => 1,
            _ => 2,
        }
    }

    pub fn degree(&self, site: usize) -> usize {
        self.neighbor_pairs
            .iter()
            .filter(|&&(i, j)| i == site || j == site)
            .count()
    }

    /// Pair distance in nm; minimum-image convention under periodic boundary.
    pub fn distance(&self, i: usize, j: usize) -> T {
        let dx = self.positions[i][0] - self.positions[j][0];
        let dy = self.positions[i][1] - self.positions[j][1];
        if self.cell_vectors.is_empty() {
            return (dx * dx + dy * dy).sqrt();
        }
        let mut best = T::infinity();
        // The screened kernel decays fast; scanning a few images per cell
        // vector is enough for the supported cells.
        let range = [-2i64, -1, 0, 1, 2];
        let (v1, v2) = match self.cell_vectors.len() {
            1 => (self.cell_vectors[0], [T::zero(), T::zero()]),
            _ => (self.cell_vectors[0], self.cell_vectors[1]),
        };
        let single = self.cell_vectors.len() == 1;
        for &k1 in &range {
            for &k2 in &range {
                if single && k2 != 0 {
                    continue;
                }
                let f1 = T::from_f(k1 as f64);
                let f2 = T::from_f(k2 as f64);
                let x = dx + f1 * v1[0] + f2 * v2[0];
                let y = dy + f1 * v1[1] + f2 * v2[1];
                let d = (x * x + y * y).sqrt();
                if d < best {
                    best = d;
                }
            }
        }
        best
    }

    /// Site indices of the leftmost column (smallest x coordinate).
    pub fn leftmost_sites(&self) -> Vec<usize> {
        self.extreme_sites(true)
    }

    /// Site indices of the rightmost column (largest x coordinate).
    pub fn rightmost_sites(&self) -> Vec<usize> {
        self.extreme_sites(false)
    }

    fn extreme_sites(&self, left: bool) -> Vec<usize> {
        let mut target = self.positions[0][0];
        for p in &self.positions {
            if (left && p[0] < target) || (!left && p[0] > target) {
                target = p[0];
            }
        }
        let tol = self.lattice_constant * T::from_f(1e-9);
        (0..self.n_sites())
            .filter(|&i| (self.positions[i][0] - target).abs() <= tol)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("lattice serializes")
    }
}

/// Build a lattice graph for the given geometry.
///
/// `n_x`/`n_y` count sites along each axis for chain and square, and unit
/// cells for honeycomb (N = 2 n_x n_y sites). Periodic boundaries need at
/// least three sites per wrapped axis (two cells for honeycomb) so that no
/// bond is duplicated by the wrap.
pub fn build_lattice<T: Scalar>(
    geometry: Geometry,
    n_x: usize,
    n_y: usize,
    a: T,
    boundary: Boundary,
) -> Result<LatticeGraph<T>> {
    if n_x < 2 {
        return Err(Error::Lattice(format!("n_x = {n_x}, need n_x >= 2")));
    }
    if n_y < 1 {
        return Err(Error::Lattice("n_y must be >= 1".into()));
    }
    if a <= T::zero() {
        return Err(Error::Lattice("lattice constant must be positive".into()));
    }
    let periodic = boundary == Boundary::Periodic;
    match geometry {
        Geometry::Chain => {
            if n_y != 1 {
                return Err(Error::Lattice(format!(
                    "chain geometry requires n_y = 1, got {n_y}"
                )));
            }
            if periodic && n_x < 3 {
                return Err(Error::Lattice(
                    "periodic chain needs at least 3 sites (wrap bond would duplicate)".into(),
                ));
            }
            let positions: Vec<[T; 2]> = (0..n_x)
                .map(|i| [T::from_f(i as f64) * a, T::zero()])
                .collect();
            let sublattice: Vec<Sublattice> = (0..n_x)
                .map(|i| if i % 2 == 0 { Sublattice::A } else { Sublattice::B })
                .collect();
            let mut pairs: Vec<(usize, usize)> = (0..n_x - 1).map(|i| (i, i + 1)).collect();
            let mut cell = Vec::new();
            if periodic {
                pairs.push((0, n_x - 1));
                cell.push([T::from_f(n_x as f64) * a, T::zero()]);
            }
            Ok(LatticeGraph {
                geometry,
                boundary,
                n_x,
                n_y,
                lattice_constant: a,
                positions,
                sublattice,
                neighbor_pairs: pairs,
                cell_vectors: cell,
            })
        }
        Geometry::Square => {
            if n_y < 2 {
                return Err(Error::Lattice("square geometry requires n_y >= 2".into()));
            }
            if periodic && (n_x < 3 || n_y < 3) {
                return Err(Error::Lattice(
                    "periodic square needs at least 3 sites per axis".into(),
                ));
            }
            let n = n_x * n_y;
            let site = |x: usize, y: usize| y * n_x + x;
            let mut positions = Vec::with_capacity(n);
            let mut sublattice = Vec::with_capacity(n);
            for y in 0..n_y {
                for x in 0..n_x {
                    positions.push([T::from_f(x as f64) * a, T::from_f(y as f64) * a]);
                    sublattice.push(if (x + y) % 2 == 0 {
                        Sublattice::A
                    } else {
                        Sublattice::B
                    });
                }
            }
            let mut pairs = Vec::new();
            for y in 0..n_y {
                for x in 0..n_x {
                    if x + 1 < n_x {
                        pairs.push((site(x, y), site(x + 1, y)));
                    } else if periodic {
                        pairs.push((site(0, y), site(x, y)));
                    }
                    if y + 1 < n_y {
                        pairs.push((site(x, y), site(x, y + 1)));
                    } else if periodic {
                        pairs.push((site(x, 0), site(x, y)));
                    }
                }
            }
            let mut cell = Vec::new();
            if periodic {
                cell.push([T::from_f(n_x as f64) * a, T::zero()]);
                cell.push([T::zero(), T::from_f(n_y as f64) * a]);
            }
            let mut pairs: Vec<(usize, usize)> = pairs
                .into_iter()
                .map(|(i, j)| if i < j { (i, j) } else { (j, i) })
                .collect();
            pairs.sort_unstable();
            Ok(LatticeGraph {
                geometry,
                boundary,
                n_x,
                n_y,
                lattice_constant: a,
                positions,
                sublattice,
                neighbor_pairs: pairs,
                cell_vectors: cell,
            })
        }
        Geometry::Honeycomb => {
            if periodic && (n_x < 2 || n_y < 2) {
                return Err(Error::Lattice(
                    "periodic honeycomb needs at least 2x2 unit cells".into(),
                ));
            }
            let half = T::from_f(0.5);
            let sqrt3 = T::from_f(3f64.sqrt());
            let three = T::from_f(3.0);
            let a1 = [a * half * three, a * half * sqrt3];
            let a2 = [a * half * three, -(a * half * sqrt3)];
            let n_cells = n_x * n_y;
            let n = 2 * n_cells;
            // unit-cell-major order, A before B within each cell
            let cell_index = |m: usize, nn: usize| nn * n_x + m;
            let a_site = |m: usize, nn: usize| 2 * cell_index(m, nn);
            let b_site = |m: usize, nn: usize| 2 * cell_index(m, nn) + 1;
            let mut positions = vec![[T::zero(); 2]; n];
            let mut sublattice = vec![Sublattice::A; n];
            for nn in 0..n_y {
                for m in 0..n_x {
                    let fm = T::from_f(m as f64);
                    let fn_ = T::from_f(nn as f64);
                    let rx = fm * a1[0] + fn_ * a2[0];
                    let ry = fm * a1[1] + fn_ * a2[1];
                    positions[a_site(m, nn)] = [rx, ry];
                    positions[b_site(m, nn)] = [rx + a, ry];
                    sublattice[a_site(m, nn)] = Sublattice::A;
                    sublattice[b_site(m, nn)] = Sublattice::B;
                }
            }
            // B(m,n) neighbors: A(m,n), A(m+1,n), A(m,n+1)
            let mut pairs = Vec::new();
            for nn in 0..n_y {
                for m in 0..n_x {
                    let b = b_site(m, nn);
                    pairs.push((a_site(m, nn), b));
                    if m + 1 < n_x {
                        pairs.push((a_site(m + 1, nn), b));
                    } else if periodic {
                        pairs.push((a_site(0, nn), b));
                    }
                    if nn + 1 < n_y {
                        pairs.push((a_site(m, nn + 1), b));
                    } else if periodic {
                        pairs.push((a_site(m, 0), b));
                    }
                }
            }
            let mut cell = Vec::new();
            if periodic {
                let fx = T::from_f(n_x as f64);
                let fy = T::from_f(n_y as f64);
                cell.push([fx * a1[0], fx * a1[1]]);
                cell.push([fy * a2[0], fy * a2[1]]);
            }
            let mut pairs: Vec<(usize, usize)> = pairs
                .into_iter()
                .map(|(i, j)| if i < j { (i, j) } else { (j, i) })
                .collect();
            pairs.sort_unstable();
            Ok(LatticeGraph {
                geometry,
                boundary,
                n_x,
                n_y,
                lattice_constant: a,
                positions,
                sublattice,
                neighbor_pairs: pairs,
                cell_vectors: cell,
            })
        }
    }
}

/// Screened Coulomb interaction matrix V_ij = V0 exp(-λ d_ij)/d_ij in meV.
#[derive(Debug, Clone)]
pub struct CoulombMatrix<T: Scalar> {
    pub v: DMatrix<T>,
    /// Strength in nm·meV.
    pub v0: T,
    /// Screening in 1/nm.
    pub lambda: T,
}

impl<T: Scalar> CoulombMatrix<T> {
    pub fn n_sites(&self) -> usize {
        self.v.nrows()
    }
}

/// Dense single-particle hopping matrix: -t on every neighbor pair.
pub fn hopping_matrix<T: Scalar>(graph: &LatticeGraph<T>, t: T) -> DMatrix<T> {
    let n = graph.n_sites();
    let mut h = DMatrix::<T>::zeros(n, n);
    for &(i, j) in &graph.neighbor_pairs {
        h[(i, j)] -= t;
        h[(j, i)] -= t;
    }
    h
}

pub fn coulomb_matrix<T: Scalar>(
    graph: &LatticeGraph<T>,
    v0: T,
    lambda: T,
) -> Result<CoulombMatrix<T>> {
    if v0 < T::zero() {
        return Err(Error::Lattice("Coulomb strength V0 must be >= 0".into()));
    }
    if lambda < T::zero() {
        return Err(Error::Lattice("screening λ must be >= 0".into()));
    }
    let n = graph.n_sites();
    let mut v = DMatrix::<T>::zeros(n, n);
    let dmin = graph.lattice_constant * T::from_f(1e-9);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = graph.distance(i, j);
            if d <= dmin {
                return Err(Error::Lattice(format!(
                    "coincident site positions for pair ({i}, {j})"
                )));
            }
            let val = v0 * (-(lambda * d)).exp() / d;
            v[(i, j)] = val;
            v[(j, i)] = val;
        }
    }
    Ok(CoulombMatrix { v, v0, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chain_43_periodic_degrees() {
        let g = build_lattice::<f64>(Geometry::Chain, 43, 1, 4.7, Boundary::Periodic).unwrap();
        assert_eq!(g.n_sites(), 43);
        for i in 0..43 {
            assert_eq!(g.degree(i), 2);
        }
        assert_eq!(g.neighbor_pairs.len(), 43);
    }

    #[test]
    fn square_2x2_open_plaquette() {
        let g = build_lattice::<f64>(Geometry::Square, 2, 2, 4.7, Boundary::Open).unwrap();
        assert_eq!(g.n_sites(), 4);
        assert_eq!(g.neighbor_pairs.len(), 4);
        for i in 0..4 {
            assert_eq!(g.degree(i), 2);
        }
    }

    #[test]
    fn square_10x10_periodic_degrees() {
        let g = build_lattice::<f64>(Geometry::Square, 10, 10, 4.7, Boundary::Periodic).unwrap();
        assert_eq!(g.n_sites(), 100);
        for i in 0..100 {
            assert_eq!(g.degree(i), 4);
        }
    }

    #[test]
    fn honeycomb_6x6_periodic() {
        let g = build_lattice::<f64>(Geometry::Honeycomb, 6, 6, 4.7, Boundary::Periodic).unwrap();
        assert_eq!(g.n_sites(), 72);
        for i in 0..72 {
            assert_eq!(g.degree(i), 3);
        }
        // every bond has nearest-neighbor length a
        for &(i, j) in &g.neighbor_pairs {
            assert!((g.distance(i, j) - 4.7).abs() < 1e-9);
        }
    }

    #[test]
    fn bipartite_even_lattices() {
        let cases: Vec<LatticeGraph<f64>> = vec![
            build_lattice(Geometry::Chain, 10, 1, 1.0, Boundary::Periodic).unwrap(),
            build_lattice(Geometry::Chain, 11, 1, 1.0, Boundary::Open).unwrap(),
            build_lattice(Geometry::Square, 4, 6, 1.0, Boundary::Periodic).unwrap(),
            build_lattice(Geometry::Square, 5, 3, 1.0, Boundary::Open).unwrap(),
            build_lattice(Geometry::Honeycomb, 3, 4, 1.0, Boundary::Periodic).unwrap(),
            build_lattice(Geometry::Honeycomb, 2, 2, 1.0, Boundary::Open).unwrap(),
        ];
        for g in &cases {
            for &(i, j) in &g.neighbor_pairs {
                let p = g.sublattice[i].parity::<f64>() * g.sublattice[j].parity::<f64>();
                assert_eq!(p, -1.0, "pair ({i},{j}) not bipartite");
            }
            // connectivity: every site appears in at least one pair
            for s in 0..g.n_sites() {
                assert!(g.degree(s) >= 1);
            }
        }
    }

    #[test]
    fn odd_periodic_chain_has_exactly_one_frustrated_bond() {
        let g = build_lattice::<f64>(Geometry::Chain, 43, 1, 1.0, Boundary::Periodic).unwrap();
        let frustrated = g
            .neighbor_pairs
            .iter()
            .filter(|&&(i, j)| g.sublattice[i] == g.sublattice[j])
            .count();
        assert_eq!(frustrated, 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_lattice::<f64>(Geometry::Chain, 1, 1, 1.0, Boundary::Open).is_err());
        assert!(build_lattice::<f64>(Geometry::Chain, 5, 2, 1.0, Boundary::Open).is_err());
        assert!(build_lattice::<f64>(Geometry::Chain, 2, 1, 1.0, Boundary::Periodic).is_err());
        assert!(build_lattice::<f64>(Geometry::Square, 2, 2, 1.0, Boundary::Periodic).is_err());
        assert!(build_lattice::<f64>(Geometry::Honeycomb, 3, 1, 1.0, Boundary::Periodic).is_err());
        assert!(build_lattice::<f64>(Geometry::Square, 3, 3, -1.0, Boundary::Open).is_err());
    }

    #[test]
    fn lattice_json_round_trip() {
        let g = build_lattice::<f64>(Geometry::Honeycomb, 2, 3, 4.7, Boundary::Periodic).unwrap();
        let json = g.to_json();
        let back: LatticeGraph<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back.n_sites(), g.n_sites());
        assert_eq!(back.neighbor_pairs, g.neighbor_pairs);
        assert_eq!(back.sublattice, g.sublattice);
        assert!((back.distance(0, 5) - g.distance(0, 5)).abs() < 1e-12);
    }

    #[test]
    fn coulomb_values() {
        let g = build_lattice::<f64>(Geometry::Chain, 4, 1, 4.7, Boundary::Open).unwrap();
        let c = coulomb_matrix(&g, 123.0, 0.0).unwrap();
        // nearest-neighbor value with the silicon constants
        assert!((c.v[(0, 1)] - 123.0 / 4.7).abs() < 1e-12);
        assert!((c.v[(0, 1)] - 26.17).abs() < 5e-3);
        for i in 0..4 {
            assert_eq!(c.v[(i, i)], 0.0);
        }
        // zero coupling
        let c0 = coulomb_matrix(&g, 0.0, 0.0).unwrap();
        assert!(c0.v.iter().all(|&x| x == 0.0));
        // full screening limit
        let cs = coulomb_matrix(&g, 123.0, 1e3).unwrap();
        assert!(cs.v[(0, 1)] < 1e-3);
    }

    #[test]
    fn coulomb_monotone_in_distance() {
        let g = build_lattice::<f64>(Geometry::Square, 5, 4, 2.0, Boundary::Open).unwrap();
        let c = coulomb_matrix(&g, 50.0, 0.3).unwrap();
        let mut entries: Vec<(f64, f64)> = Vec::new();
        for i in 0..g.n_sites() {
            for j in (i + 1)..g.n_sites() {
                entries.push((g.distance(i, j), c.v[(i, j)]));
            }
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in entries.windows(2) {
            if w[1].0 - w[0].0 > 1e-9 {
                assert!(w[1].1 < w[0].1 + 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn minimum_image_symmetry(n in 3usize..40, k in 1usize..39) {
            prop_assume!(k < n);
            let g = build_lattice::<f64>(Geometry::Chain, n, 1, 1.3, Boundary::Periodic).unwrap();
            let i = 0usize;
            let j = k % n;
            let j_mirror = (n - k) % n;
            prop_assume!(j != 0 && j_mirror != 0);
            let d1 = g.distance(i, j);
            let d2 = g.distance(i, j_mirror);
            prop_assert!((d1 - d2).abs() < 1e-9);
        }

        #[test]
        fn bipartite_random_even(nx in 1usize..6, ny in 1usize..6) {
            let g = build_lattice::<f64>(Geometry::Square, 2*nx + 2, 2*ny + 2, 1.0, Boundary::Periodic).unwrap();
            for &(i, j) in &g.neighbor_pairs {
                prop_assert!(g.sublattice[i] != g.sublattice[j]);
            }
        }
    }
}
