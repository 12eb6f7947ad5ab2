//! Physical couplings, laboratory-knob conversions, and per-site Hamiltonian
//! coefficients.
//!
//! Energies are meV throughout except the hyperfine coupling, which is stored
//! in μeV (its natural laboratory scale) and converted on access. The phase
//! diagrams are indexed by the dimensionless groups gS/t, h_zS/t, h_xS/t.

use crate::error::{Error, Result};
use crate::lattice::{Geometry, LatticeGraph};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Inverse temperature in 1/meV, with an exact zero-temperature sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Beta<T> {
    /// β = ∞, i.e. T = 0. Handled by ground-sector selection, never by a
    /// large finite β.
    Infinite,
    Finite(T),
}

impl<T: Scalar> Beta<T> {
    pub fn is_zero_temperature(&self) -> bool {
        matches!(self, Beta::Infinite)
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            Beta::Infinite => None,
            Beta::Finite(b) => Some(*b),
        }
    }
}

/// All couplings of the lattice model plus temperature and filling targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelParams<T: Scalar> {
    /// Nearest-neighbor hopping, meV.
    pub t: T,
    /// Hyperfine coupling, μeV.
    pub g_uev: T,
    /// Twice the nuclear spin magnitude (2S ∈ 1..=9).
    pub two_s: u32,
    /// Longitudinal effective field on the nuclear spins (rotating frame), meV.
    pub h_z: T,
    /// Transverse drive field, meV.
    pub h_x: T,
    /// Uniform chemical potential, meV.
    pub mu: T,
    /// Optional per-site override of the chemical potential.
    pub mu_site: Option<Vec<T>>,
    /// Coulomb strength, nm·meV.
    pub v0: T,
    /// Coulomb screening, 1/nm.
    pub lambda: T,
    /// Inverse temperature, 1/meV.
    pub beta: Beta<T>,
    /// Target filling ν as a fraction of N.
    pub filling: T,
    /// Electrons added on top of ⌊νN⌋ (e.g. +1 for one above half filling).
    pub extra_electrons: i64,
}

impl<T: Scalar> Default for ModelParams<T> {
    /// Laboratory default parameter set: S = 1/2, t = 7.5 meV, g = 0.48 μeV,
    /// V0 = 123 nm·meV, λ = 0, zero fields, half filling, T = 0.
    fn default() -> Self {
        ModelParams {
            t: T::from_f(7.5),
            g_uev: T::from_f(0.48),
            two_s: 1,
            h_z: T::zero(),
            h_x: T::zero(),
            mu: T::zero(),
            mu_site: None,
            v0: T::from_f(123.0),
            lambda: T::zero(),
            beta: Beta::Infinite,
            filling: T::from_f(0.5),
            extra_electrons: 0,
        }
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Nuclear spin magnitude S.
    pub fn spin_s(&self) -> T {
        T::from_f(self.two_s as f64 / 2.0)
    }

    /// Hyperfine coupling in meV.
    pub fn g_mev(&self) -> T {
        self.g_uev * T::from_f(1e-3)
    }

    /// Electron count for a lattice of `n` sites: ⌊νN⌋ + extra.
    pub fn electron_count(&self, n: usize) -> usize {
        let base = (self.filling.to_f() * n as f64 + 1e-9).floor() as i64;
        let count = base + self.extra_electrons;
        count.clamp(0, n as i64) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.t <= T::zero() {
            return Err(Error::Model("hopping t must be positive".into()));
        }
        if !(1..=9).contains(&self.two_s) {
            return Err(Error::Model(format!(
                "2S = {} outside the supported range 1..=9",
                self.two_s
            )));
        }
        if let Beta::Finite(b) = self.beta {
            if b <= T::zero() {
                return Err(Error::Model("finite β must be positive".into()));
            }
        }
        if self.filling < T::zero() || self.filling > T::one() {
            return Err(Error::Model("filling must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Convenience: set h_z and h_x via the dimensionless groups h S/t.
    pub fn with_field_ratios(mut self, hz_s_over_t: T, hx_s_over_t: T) -> Self {
        let scale = self.t / self.spin_s();
        self.h_z = hz_s_over_t * scale;
        self.h_x = hx_s_over_t * scale;
        self
    }

    /// Convenience: set the hyperfine coupling via gS/t.
    pub fn with_coupling_ratio(mut self, g_s_over_t: T) -> Self {
        self.g_uev = g_s_over_t * self.t / self.spin_s() * T::from_f(1e3);
        self
    }
}

/// Dimensionless regime summary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegimeReport<T> {
    pub g_s_over_t: T,
    pub hz_s_over_t: T,
    pub hx_s_over_t: T,
    /// Large-detuning condition |h_z| >= 10 |h_x|.
    pub detuning_ok: bool,
    /// gS/t and h_zS/t within a factor of 10 of each other, with the
    /// detuning condition satisfied.
    pub neel_window_hint: bool,
}

pub fn dimensionless_regime<T: Scalar>(p: &ModelParams<T>) -> RegimeReport<T> {
    let s = p.spin_s();
    let g_s_over_t = p.g_mev() * s / p.t;
    let hz_s_over_t = p.h_z * s / p.t;
    let hx_s_over_t = p.h_x * s / p.t;
    let detuning_ok = p.h_z.abs() >= T::from_f(10.0) * p.h_x.abs();
    let comparable = if g_s_over_t > T::zero() && hz_s_over_t.abs() > T::zero() {
        let hi = g_s_over_t.max(hz_s_over_t.abs());
        let lo = g_s_over_t.min(hz_s_over_t.abs());
        hi / lo <= T::from_f(10.0)
    } else {
        false
    };
    RegimeReport {
        g_s_over_t,
        hz_s_over_t,
        hx_s_over_t,
        detuning_ok,
        neel_window_hint: detuning_ok && comparable,
    }
}

/// Stark-shifted hyperfine coupling g(E) = g0 (1 + 2.8e-3 E²).
pub fn stark_shifted_g<T: Scalar>(g0_uev: T, e_field: T) -> T {
    g0_uev * (T::one() + T::from_f(2.8e-3) * e_field * e_field)
}

/// Calibrated exponential hopping profile t(a) = t_ref exp(-(a - a_ref)/ξ).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TunnelingProfile<T> {
    /// Reference hopping, meV.
    pub t_ref: T,
    /// Reference lattice constant, nm.
    pub a_ref: T,
    /// Decay length, nm.
    pub xi: T,
}

impl<T: Scalar> Default for TunnelingProfile<T> {
    fn default() -> Self {
        TunnelingProfile {
            t_ref: T::from_f(7.5),
            a_ref: T::from_f(4.7),
            xi: T::one(),
        }
    }
}

impl<T: Scalar> TunnelingProfile<T> {
    pub fn new(t_ref: T, a_ref: T, xi: T) -> Result<Self> {
        if xi <= T::zero() {
            return Err(Error::Model("decay length ξ must be positive".into()));
        }
        if t_ref <= T::zero() || a_ref <= T::zero() {
            return Err(Error::Model("profile reference values must be positive".into()));
        }
        Ok(TunnelingProfile { t_ref, a_ref, xi })
    }

    /// Exponential fit through two (a, t) calibration points.
    pub fn from_two_points(p1: (T, T), p2: (T, T)) -> Result<Self> {
        let (a1, t1) = p1;
        let (a2, t2) = p2;
        if t1 <= T::zero() || t2 <= T::zero() {
            return Err(Error::Model("calibration hoppings must be positive".into()));
        }
        if (a1 - a2).abs() <= T::zero() {
            return Err(Error::Model("calibration points must differ in a".into()));
        }
        let xi = (a2 - a1) / (t1 / t2).ln();
        if xi <= T::zero() {
            return Err(Error::Model(
                "calibration points imply a non-decaying profile".into(),
            ));
        }
        Ok(TunnelingProfile { t_ref: t1, a_ref: a1, xi })
    }

    pub fn evaluate(&self, a: T) -> T {
        self.t_ref * (-(a - self.a_ref) / self.xi).exp()
    }
}

/// Pinning pattern for the staggered nuclear-spin field on a chain: the base
/// alternation ε(-1)^(i+1) (0-based i) is reversed on the `d` sites starting
/// at `start`, creating two domain walls at bonds (start-1, start) and
/// (start+d-1, start+d).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PinningPattern<T> {
    pub start: usize,
    pub d: usize,
    /// Field strength ε, meV.
    pub strength: T,
}

/// Per-site Hamiltonian coefficients: chemical potential μ_i and pinning
/// field ε_i (both meV).
#[derive(Debug, Clone)]
pub struct SitePotentials<T> {
    pub mu: Vec<T>,
    pub epsilon: Vec<T>,
}

pub fn site_potentials<T: Scalar>(
    p: &ModelParams<T>,
    graph: &LatticeGraph<T>,
    pinning: Option<&PinningPattern<T>>,
) -> Result<SitePotentials<T>> {
    let n = graph.n_sites();
    let mu = match &p.mu_site {
        Some(v) => {
            if v.len() != n {
                return Err(Error::Model(format!(
                    "mu_site length {} does not match N = {n}",
                    v.len()
                )));
            }
            v.clone()
        }
        None => vec![p.mu; n],
    };
    let epsilon = match pinning {
        None => vec![T::zero(); n],
        Some(pin) => {
            if graph.geometry != Geometry::Chain {
                return Err(Error::Model(
                    "pinning potential is defined on the chain geometry only".into(),
                ));
            }
            if pin.start + pin.d > n {
                return Err(Error::Model(format!(
                    "pinning region [{}, {}) exceeds the chain length {n}",
                    pin.start,
                    pin.start + pin.d
                )));
            }
            pinning_pattern(pin, n)
        }
    };
    Ok(SitePotentials { mu, epsilon })
}

fn pinning_pattern<T: Scalar>(pin: &PinningPattern<T>, n: usize) -> Vec<T> {
    (0..n)
        .map(|s| {
            let inside = s >= pin.start && s < pin.start + pin.d;
            // base alternation ε(-1)^i in 1-based indexing, i.e. ε(-1)^(s+1);
            // reversed inside the pinned window
            let sign = if (s + 1) % 2 == 0 { T::one() } else { -T::one() };
            if inside {
                -sign * pin.strength
            } else {
                sign * pin.strength
            }
        })
        .collect()
}
