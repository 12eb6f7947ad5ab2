//! TOML run configuration. Every key is optional with the laboratory
//! defaults (S = 1/2, t = 7.5 meV, g = 0.48 μeV, V0 = 123 nm·meV,
//! a = 4.7 nm, periodic boundary); unknown keys are errors.

use anyhow::{bail, Context, Result};
use donorsim_core::ed::EdConfig;
use donorsim_core::lattice::{Boundary, Geometry};
use donorsim_core::meanfield::SolverConfig;
use donorsim_core::model::{Beta, ModelParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub ed: EdSection,
    #[serde(default)]
    pub phase_diagram: PhaseDiagramSection,
    #[serde(default)]
    pub confinement: ConfinementSection,
    #[serde(default)]
    pub charge_profile: ChargeProfileSection,
    #[serde(default)]
    pub conductance: ConductanceSection,
    #[serde(default)]
    pub bands: BandsSection,
    #[serde(default)]
    pub correlators: CorrelatorsSection,
}

/// Inverse temperature: a number in 1/meV or the string "inf" for T = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaValue {
    Number(f64),
    Text(String),
}

impl Default for BetaValue {
    fn default() -> Self {
        BetaValue::Text("inf".into())
    }
}

impl BetaValue {
    pub fn to_beta(&self) -> Result<Beta<f64>> {
        match self {
            BetaValue::Number(x) => {
                if *x <= 0.0 {
                    bail!("model.beta_per_mev must be positive or \"inf\"");
                }
                Ok(Beta::Finite(*x))
            }
            BetaValue::Text(s) if s == "inf" => Ok(Beta::Infinite),
            BetaValue::Text(s) => bail!("model.beta_per_mev: unrecognized value {s:?}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Nuclear spin magnitude S (half-integer, 1/2 ..= 9/2).
    pub s: f64,
    pub t_mev: f64,
    pub g_uev: f64,
    pub h_z_mev: f64,
    pub h_x_mev: f64,
    pub mu_mev: f64,
    pub v0_nm_mev: f64,
    pub lambda_per_nm: f64,
    pub beta_per_mev: BetaValue,
    pub filling: f64,
    pub extra_electrons: i64,
    /// Optional Tesla → meV conversion for reporting fields in Tesla.
    pub gyromagnetic_mev_per_tesla: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            s: 0.5,
            t_mev: 7.5,
            g_uev: 0.48,
            h_z_mev: 0.0,
            h_x_mev: 0.0,
            mu_mev: 0.0,
            v0_nm_mev: 123.0,
            lambda_per_nm: 0.0,
            beta_per_mev: BetaValue::default(),
            filling: 0.5,
            extra_electrons: 0,
            gyromagnetic_mev_per_tesla: None,
        }
    }
}

impl ModelSection {
    pub fn to_params(&self) -> Result<ModelParams<f64>> {
        let two_s = (self.s * 2.0).round();
        if (two_s - self.s * 2.0).abs() > 1e-9 || !(1.0..=9.0).contains(&two_s) {
            bail!("model.s must be a half-integer in 1/2 ..= 9/2, got {}", self.s);
        }
        let p = ModelParams {
            t: self.t_mev,
            g_uev: self.g_uev,
            two_s: two_s as u32,
            h_z: self.h_z_mev,
            h_x: self.h_x_mev,
            mu: self.mu_mev,
            mu_site: None,
            v0: self.v0_nm_mev,
            lambda: self.lambda_per_nm,
            beta: self.beta_per_mev.to_beta()?,
            filling: self.filling,
            extra_electrons: self.extra_electrons,
        };
        p.validate().map_err(|e| anyhow::anyhow!("model: {e}"))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub geometry: String,
    pub n_x: usize,
    pub n_y: usize,
    pub a_nm: f64,
    pub boundary: String,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection {
            geometry: "chain".into(),
            n_x: 43,
            n_y: 1,
            a_nm: 4.7,
            boundary: "periodic".into(),
        }
    }
}

impl LatticeSection {
    pub fn geometry(&self) -> Result<Geometry> {
        match self.geometry.as_str() {
            "chain" => Ok(Geometry::Chain),
            "square" => Ok(Geometry::Square),
            "honeycomb" => Ok(Geometry::Honeycomb),
            other => bail!("lattice.geometry: unknown geometry {other:?}"),
        }
    }

    pub fn boundary(&self) -> Result<Boundary> {
        match self.boundary.as_str() {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => bail!("lattice.boundary: unknown boundary {other:?}"),
        }
    }

    pub fn build(&self) -> Result<donorsim_core::LatticeGraph64> {
        donorsim_core::lattice::build_lattice(
            self.geometry()?,
            self.n_x,
            self.n_y,
            self.a_nm,
            self.boundary()?,
        )
        .map_err(|e| anyhow::anyhow!("lattice: {e}"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub mixing: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub include_fock: bool,
    pub include_pairing: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            mixing: 0.5,
            tolerance: 1e-10,
            max_iterations: 5000,
            restarts: 3,
            include_fock: true,
            include_pairing: true,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self, seed: u64) -> SolverConfig<f64> {
        SolverConfig {
            mixing: self.mixing,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            seed,
            init: None,
            include_fock: self.include_fock,
            include_pairing: self.include_pairing,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdSection {
    pub dim_cap: usize,
    pub dense_cutoff: usize,
    pub degeneracy_tol: f64,
}

impl Default for EdSection {
    fn default() -> Self {
        let d = EdConfig::default();
        EdSection {
            dim_cap: d.dim_cap,
            dense_cutoff: d.dense_cutoff,
            degeneracy_tol: d.degeneracy_tol,
        }
    }
}

impl EdSection {
    pub fn to_config(&self) -> EdConfig {
        EdConfig {
            dim_cap: self.dim_cap,
            dense_cutoff: self.dense_cutoff,
            degeneracy_tol: self.degeneracy_tol,
        }
    }
}

/// One sweep axis in dimensionless units.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: String,
}

fn default_scale() -> String {
    "linear".into()
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("axis needs points >= 1");
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        match self.scale.as_str() {
            "linear" => Ok((0..self.points)
                .map(|k| {
                    self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64
                })
                .collect()),
            "log" => {
                if self.min <= 0.0 || self.max <= 0.0 {
                    bail!("log axis needs positive bounds");
                }
                Ok((0..self.points)
                    .map(|k| {
                        self.min
                            * (self.max / self.min)
                                .powf(k as f64 / (self.points - 1) as f64)
                    })
                    .collect())
            }
            other => bail!("axis.scale: unknown scale {other:?}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseDiagramSection {
    /// "hf" | "fthfb" | "ed"
    pub solver: String,
    /// gS/t axis.
    pub g_axis: Axis,
    /// h_z S/t axis (the ordered phase sits at negative detuning).
    pub hz_axis: Axis,
    pub hx_s_over_t: f64,
    /// When set, overrides model.v0_nm_mev via V0 = (V0/at)·a·t.
    pub v0_over_at: Option<f64>,
    /// FTHFB only: tune μ once (at the last grid point) to this electron
    /// number and reuse it across the grid.
    pub tune_target_n: Option<f64>,
    /// Chain solves along each g-row, warm-starting from the previous point.
    pub warm_start: bool,
}

impl Default for PhaseDiagramSection {
    fn default() -> Self {
        PhaseDiagramSection {
            solver: "hf".into(),
            g_axis: Axis { min: 0.1, max: 1.0, points: 4, scale: "linear".into() },
            hz_axis: Axis { min: -0.6, max: 0.0, points: 7, scale: "linear".into() },
            hx_s_over_t: 0.01,
            v0_over_at: Some(1.1),
            tune_target_n: None,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfinementCurve {
    pub gs_over_t: f64,
    /// Electrons added on top of half filling for this curve (the bound
    /// wall pair shares one mid-gap electron at 0; +1 releases a charge).
    #[serde(default)]
    pub extra_electrons: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfinementSection {
    pub i0: usize,
    pub d_values: Vec<usize>,
    pub eps_over_t: f64,
    pub curves: Vec<ConfinementCurve>,
    pub hz_s_over_t: f64,
    pub hx_s_over_t: f64,
    pub v0_over_at: Vec<f64>,
}

impl Default for ConfinementSection {
    fn default() -> Self {
        ConfinementSection {
            i0: 13,
            d_values: vec![2, 4, 6, 8, 10, 12, 14],
            eps_over_t: 0.05,
            curves: vec![
                ConfinementCurve { gs_over_t: 1.0, extra_electrons: 0 },
                ConfinementCurve { gs_over_t: 0.2, extra_electrons: 1 },
            ],
            hz_s_over_t: -0.4,
            hx_s_over_t: 0.01,
            v0_over_at: vec![0.0, 3.6],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChargeProfileSection {
    pub mu_over_t: f64,
    pub g_axis: Axis,
    pub hz_axis: Axis,
    pub hx_s_over_t: f64,
    pub temperature_mk: f64,
    /// When set, overrides model.v0_nm_mev via V0 = (V0/at)·a·t.
    pub v0_over_at: Option<f64>,
}

impl Default for ChargeProfileSection {
    fn default() -> Self {
        ChargeProfileSection {
            mu_over_t: 0.91,
            g_axis: Axis { min: 0.05, max: 1.0, points: 8, scale: "linear".into() },
            hz_axis: Axis { min: -0.8, max: 0.0, points: 9, scale: "linear".into() },
            hx_s_over_t: 0.01,
            temperature_mk: 10.0,
            v0_over_at: Some(0.6),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConductanceSection {
    pub hz_s_over_t_values: Vec<f64>,
    pub gamma: f64,
    pub t_reservoir_mk: f64,
    pub t_island_mk: f64,
    /// Explicit μ window (meV); when absent, windows around the addition
    /// energies are scanned.
    pub mu_min_mev: Option<f64>,
    pub mu_max_mev: Option<f64>,
    pub mu_points: usize,
    /// Half-width of the automatic windows in units of k_B T_r.
    pub window_kt: f64,
}

impl Default for ConductanceSection {
    fn default() -> Self {
        ConductanceSection {
            hz_s_over_t_values: vec![1e-5],
            gamma: 1.0,
            t_reservoir_mk: 10.0,
            t_island_mk: 0.01,
            mu_min_mev: None,
            mu_max_mev: None,
            mu_points: 321,
            window_kt: 25.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsSection {
    pub resolution: usize,
    /// Staggered order amplitude feeding the gapped square spectrum.
    pub phi0: f64,
}

impl Default for BandsSection {
    fn default() -> Self {
        BandsSection { resolution: 256, phi0: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelatorsSection {
    /// "hf" | "fthfb" | "ed"
    pub solver: String,
    /// Reference site (defaults to N/2).
    pub i0: Option<usize>,
    pub d_max: Option<usize>,
}

impl Default for CorrelatorsSection {
    fn default() -> Self {
        CorrelatorsSection { solver: "hf".into(), i0: None, d_max: None }
    }
}

pub fn load(path: Option<&std::path::Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            let cfg: Config = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))?;
            Ok(cfg)
        }
    }
}
