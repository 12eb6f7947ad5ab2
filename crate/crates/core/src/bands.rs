//! Tight-binding dispersions and continuum-limit checks: square-lattice
//! Fermi-surface nesting, the staggered-field gapped spectrum, and the
//! honeycomb Dirac cones.
//!
//! Momenta are in 1/nm, energies in meV. All functions are pure; couplings
//! are passed in the same energy unit as `t`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// 1D chain dispersion ε(k) = -2t cos(ka).
pub fn chain_dispersion<T: Scalar>(k: T, t: T, a: T) -> T {
    -T::from_f(2.0) * t * (k * a).cos()
}

/// Square-lattice dispersion ε(k) = -2t [cos(k_x a) + cos(k_y a)].
pub fn square_dispersion<T: Scalar>(k: [T; 2], t: T, a: T) -> T {
    -T::from_f(2.0) * t * ((k[0] * a).cos() + (k[1] * a).cos())
}

/// Check that k + Q with Q = (π/a, π/a) stays on the Fermi surface.
/// Errors if `k` is not itself on the Fermi surface to within `tol`.
pub fn nesting_check<T: Scalar>(k: [T; 2], t: T, a: T, tol: T) -> Result<bool> {
    let e = square_dispersion(k, t, a);
    if e.abs() >= tol {
        return Err(Error::Model(format!(
            "k is not on the Fermi surface: |ε| = {:e}",
            e.to_f()
        )));
    }
    let q = T::from_f(std::f64::consts::PI) / a;
    let shifted = square_dispersion([k[0] + q, k[1] + q], t, a);
    Ok(shifted.abs() < tol)
}

/// Sample `n` points of the half-filling Fermi surface cos(k_x a) + cos(k_y a) = 0.
pub fn fermi_surface_locus<T: Scalar>(a: T, n: usize) -> Vec<[T; 2]> {
    let pi = T::from_f(std::f64::consts::PI);
    (0..n)
        .map(|i| {
            // kx a in (-π/2, π/2) so that -cos(kx a) lands in (-1, 1)
            let frac = T::from_f((i as f64 + 0.5) / n as f64);
            let kxa = -pi / T::from_f(2.0) + pi * frac;
            let kya = (-(kxa).cos()).acos();
            let sign = if i % 2 == 0 { T::one() } else { -T::one() };
            [kxa / a, sign * kya / a]
        })
        .collect()
}

/// Two-band spectrum of the square lattice in a staggered field of strength
/// gS φ0, in the rotated (k+, k-) coordinates of the reduced Brillouin zone
/// |k±| ≤ π/(√2 a):
/// ε±(k) = ±sqrt[(gS φ0)² + 16 t² cos²(k+ a/√2) cos²(k- a/√2)].
pub fn gapped_square_spectrum<T: Scalar>(
    k_plus: T,
    k_minus: T,
    t: T,
    g: T,
    s: T,
    phi0: T,
    a: T,
) -> Result<(T, T)> {
    let bound = T::from_f(std::f64::consts::PI) / (T::from_f(2f64.sqrt()) * a);
    let eps = bound * T::from_f(1e-12);
    for k in [k_plus, k_minus] {
        if k <= -bound - eps || k > bound + eps {
            return Err(Error::Model(
                "momentum outside the reduced Brillouin zone".into(),
            ));
        }
    }
    let m = g * s * phi0;
    let sqrt2 = T::from_f(2f64.sqrt());
    let cp = (k_plus * a / sqrt2).cos();
    let cm = (k_minus * a / sqrt2).cos();
    let kin = T::from_f(16.0) * t * t * cp * cp * cm * cm;
    let e = (m * m + kin).sqrt();
    Ok((-e, e))
}

/// Honeycomb basis vectors a1 = (a/2)(3, √3), a2 = (a/2)(3, -√3).
pub fn honeycomb_basis_vectors<T: Scalar>(a: T) -> ([T; 2], [T; 2]) {
    let half = a * T::from_f(0.5);
    let s3 = T::from_f(3f64.sqrt());
    ([half * T::from_f(3.0), half * s3], [half * T::from_f(3.0), -(half * s3)])
}

/// Reciprocal vectors b1 = (2π/3a)(1, √3), b2 = (2π/3a)(1, -√3).
pub fn honeycomb_reciprocal_vectors<T: Scalar>(a: T) -> ([T; 2], [T; 2]) {
    let c = T::from_f(2.0 * std::f64::consts::PI / 3.0) / a;
    let s3 = T::from_f(3f64.sqrt());
    ([c, c * s3], [c, -(c * s3)])
}

/// Dirac point K = (2π/3a)(1, 1/√3).
pub fn honeycomb_k_point<T: Scalar>(a: T) -> [T; 2] {
    let c = T::from_f(2.0 * std::f64::consts::PI / 3.0) / a;
    [c, c / T::from_f(3f64.sqrt())]
}

/// Honeycomb tight-binding bands ε±(k) = ±t |1 + e^{ik·a1} + e^{ik·a2}|.
pub fn honeycomb_bands<T: Scalar>(k: [T; 2], t: T, a: T) -> (T, T) {
    let (a1, a2) = honeycomb_basis_vectors(a);
    let p1 = k[0] * a1[0] + k[1] * a1[1];
    let p2 = k[0] * a2[0] + k[1] * a2[1];
    let re = T::one() + p1.cos() + p2.cos();
    let im = p1.sin() + p2.sin();
    let e = t * (re * re + im * im).sqrt();
    (-e, e)
}

/// One-sided finite-difference slope of the upper honeycomb band along a unit
/// direction from the Dirac point; converges to v_F = 3ta/2.
pub fn honeycomb_fermi_velocity<T: Scalar>(t: T, a: T, direction: [T; 2], step: T) -> T {
    let kk = honeycomb_k_point(a);
    let norm = (direction[0] * direction[0] + direction[1] * direction[1]).sqrt();
    let d = [direction[0] / norm, direction[1] / norm];
    let e0 = honeycomb_bands(kk, t, a).1;
    let e1 = honeycomb_bands([kk[0] + step * d[0], kk[1] + step * d[1]], t, a).1;
    (e1 - e0) / step
}

/// Central finite-difference slope of the chain dispersion at momentum k.
pub fn chain_group_velocity<T: Scalar>(k: T, t: T, a: T, step: T) -> T {
    (chain_dispersion(k + step, t, a) - chain_dispersion(k - step, t, a)) / (T::from_f(2.0) * step)
}

/// Uniform k-grid band table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionGrid<T> {
    pub k_points: Vec<[T; 2]>,
    /// Band energies per k-point, each row sorted ascending.
    pub bands: Vec<Vec<T>>,
}

/// Square-lattice bands on an n×n grid over the full Brillouin zone
/// (-π/a, π/a]².
pub fn square_band_grid<T: Scalar>(t: T, a: T, n: usize) -> DispersionGrid<T> {
    let pi = T::from_f(std::f64::consts::PI);
    let mut k_points = Vec::with_capacity(n * n);
    let mut bands = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            let kx = (-pi + T::from_f(2.0) * pi * T::from_f((ix + 1) as f64 / n as f64)) / a;
            let ky = (-pi + T::from_f(2.0) * pi * T::from_f((iy + 1) as f64 / n as f64)) / a;
            k_points.push([kx, ky]);
            bands.push(vec![square_dispersion([kx, ky], t, a)]);
        }
    }
    DispersionGrid { k_points, bands }
}

/// Honeycomb bands on an n×n grid over the reciprocal cell spanned by b1, b2.
pub fn honeycomb_band_grid<T: Scalar>(t: T, a: T, n: usize) -> DispersionGrid<T> {
    let (b1, b2) = honeycomb_reciprocal_vectors(a);
    let mut k_points = Vec::with_capacity(n * n);
    let mut bands = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fi = T::from_f((i + 1) as f64 / n as f64);
            let fj = T::from_f((j + 1) as f64 / n as f64);
            let k = [fi * b1[0] + fj * b2[0], fi * b1[1] + fj * b2[1]];
            let (lo, hi) = honeycomb_bands(k, t, a);
            k_points.push(k);
            bands.push(vec![lo, hi]);
        }
    }
    DispersionGrid { k_points, bands }
}

/// Numerical minimum of the upper gapped-square band over an n×n grid of the
/// reduced Brillouin zone; equals gS|φ0| up to grid resolution.
pub fn gapped_square_min<T: Scalar>(t: T, g: T, s: T, phi0: T, a: T, n: usize) -> T {
    let bound = T::from_f(std::f64::consts::PI) / (T::from_f(2f64.sqrt()) * a);
    let mut min = T::infinity();
    for i in 0..n {
        for j in 0..n {
            // include the zone boundary +π/(√2 a)
            let kp = -bound + T::from_f(2.0) * bound * T::from_f((i + 1) as f64 / n as f64);
            let km = -bound + T::from_f(2.0) * bound * T::from_f((j + 1) as f64 / n as f64);
            let (_, e) = gapped_square_spectrum(kp, km, t, g, s, phi0, a).unwrap();
            if e < min {
                min = e;
            }
        }
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const T_HOP: f64 = 7.5;
    const A: f64 = 4.7;

    #[test]
    fn square_band_edges() {
        assert!((square_dispersion([0.0, 0.0], T_HOP, A) + 4.0 * T_HOP).abs() < 1e-12);
        let kf = [PI / (2.0 * A), PI / (2.0 * A)];
        assert!(square_dispersion(kf, T_HOP, A).abs() < 1e-12);
    }

    #[test]
    fn chain_fermi_velocity() {
        let kf = PI / (2.0 * A);
        let v = chain_group_velocity(kf, T_HOP, A, 1e-4 / A);
        assert!((v - 2.0 * T_HOP * A).abs() / (2.0 * T_HOP * A) < 1e-3);
    }

    #[test]
    fn nesting_on_sampled_fermi_surface() {
        let tol = 1e-8;
        for k in fermi_surface_locus::<f64>(A, 200) {
            assert!(square_dispersion(k, T_HOP, A).abs() < tol);
            assert!(nesting_check(k, T_HOP, A, tol).unwrap());
        }
        assert!(nesting_check([0.0, 0.0], T_HOP, A, 1e-8).is_err());
    }

    #[test]
    fn gapped_spectrum_limits() {
        let bound = PI / (2f64.sqrt() * A);
        // ungapped on the reduced-zone boundary
        let (lo, hi) = gapped_square_spectrum(bound, 0.1, T_HOP, 1.0, 0.5, 0.0, A).unwrap();
        assert!(hi.abs() < 1e-9 * T_HOP);
        assert_eq!(lo, -hi);
        // pure mass at the cosine zero
        let (_, hi) = gapped_square_spectrum(bound, 0.2, T_HOP, 1.0, 1.0, 1.0, A).unwrap();
        assert!((hi - 1.0).abs() < 1e-9);
        assert!(gapped_square_spectrum(3.0 * bound, 0.0, T_HOP, 1.0, 0.5, 1.0, A).is_err());
    }

    #[test]
    fn gapped_minimum_matches_mass() {
        let m = 0.3 * T_HOP;
        let min = gapped_square_min(T_HOP, m, 1.0, 1.0, A, 500);
        assert!((min - m).abs() < 1e-6 * T_HOP);
    }

    #[test]
    fn honeycomb_dirac_point_and_extrema() {
        let k = honeycomb_k_point::<f64>(A);
        let (lo, hi) = honeycomb_bands(k, T_HOP, A);
        assert!(hi.abs() < 1e-12);
        assert!(lo.abs() < 1e-12);
        let (lo0, hi0) = honeycomb_bands([0.0, 0.0], T_HOP, A);
        assert!((hi0 - 3.0 * T_HOP).abs() < 1e-12);
        assert!((lo0 + 3.0 * T_HOP).abs() < 1e-12);
    }

    #[test]
    fn honeycomb_fermi_velocity_value() {
        let vf = 1.5 * T_HOP * A;
        for dir in [[1.0, 0.0], [0.0, 1.0], [0.7, -0.3], [-1.0, 2.0]] {
            let v = honeycomb_fermi_velocity(T_HOP, A, dir, 1e-4 / A);
            assert!((v - vf).abs() / vf < 1e-3, "dir {dir:?}: v = {v}");
        }
    }

    #[test]
    fn particle_hole_symmetry_and_periodicity() {
        let (b1, b2) = honeycomb_reciprocal_vectors::<f64>(A);
        let (a1, a2) = honeycomb_basis_vectors::<f64>(A);
        // b_j · a_i = 2π δ_ij
        assert!((b1[0] * a1[0] + b1[1] * a1[1] - 2.0 * PI).abs() < 1e-12);
        assert!((b1[0] * a2[0] + b1[1] * a2[1]).abs() < 1e-12);
        assert!((b2[0] * a2[0] + b2[1] * a2[1] - 2.0 * PI).abs() < 1e-12);
        for k in [[0.1, -0.2], [0.4, 0.3], [-0.9, 0.05]] {
            let (lo, hi) = honeycomb_bands(k, T_HOP, A);
            assert_eq!(lo, -hi);
            let shifted = [k[0] + b1[0] + b2[0], k[1] + b1[1] + b2[1]];
            let (_, hi_s) = honeycomb_bands(shifted, T_HOP, A);
            assert!((hi - hi_s).abs() < 1e-9);
            // square periodicity under 2π/a shifts
            let e = square_dispersion(k, T_HOP, A);
            let e_s = square_dispersion([k[0] + 2.0 * PI / A, k[1]], T_HOP, A);
            assert!((e - e_s).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_formula_random_draws() {
        let mut seed = 12345u64;
        let mut rng = move || {
            // xorshift, good enough for parameter draws
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed % 10_000) as f64 / 10_000.0
        };
        for _ in 0..5 {
            let t = 1.0 + 9.0 * rng();
            let m = 0.05 * t + 0.5 * t * rng();
            let min = gapped_square_min(t, m, 1.0, 1.0, A, 400);
            assert!((min - m).abs() < 1e-6 * t);
        }
    }
}
