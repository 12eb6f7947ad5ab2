//! Subcommand implementations. Each returns the produced output files plus
//! whether any solver failed to converge (for strict-mode exit codes).

use crate::config::Config;
use crate::output::{write_rows, Row};
use anyhow::{anyhow, bail, Result};
use donorsim_core::ed::{full_spectrum, thermal_ensemble};
use donorsim_core::lattice::{coulomb_matrix, Geometry};
use donorsim_core::meanfield::{
    solve, solve_with_start, tune_chemical_potential, SolverKind,
};
use donorsim_core::model::{Beta, ModelParams};
use donorsim_core::observables::{
    report_from_ed, report_from_meanfield, static_potential, ObservableReport,
};
use donorsim_core::{beta_from_mk, transport};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub struct CommandOutcome {
    pub outputs: Vec<PathBuf>,
    pub all_converged: bool,
}

fn report_rows(point: usize, coords: &[(String, f64)], rep: &ObservableReport<f64>) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut push = |observable: &str, value: f64| {
        rows.push(Row {
            point,
            coords: coords.to_vec(),
            observable: observable.to_string(),
            value,
            converged: rep.converged,
        });
    };
    push("n_z", rep.n_z);
    push("n_z_abs", rep.n_z.abs());
    push("n_z_raw", rep.n_z_raw);
    push("total_n", rep.total_n);
    push("energy_mev", rep.energy);
    if let Some(omega) = rep.omega {
        push("omega_mev", omega);
    }
    push("k_tilde", rep.k_tilde);
    rows
}

/// `regime`: dimensionless groups and the ordered-window hint.
pub fn regime(cfg: &Config, out: &Path, _seed: u64) -> Result<CommandOutcome> {
    let p = cfg.model.to_params()?;
    let rep = donorsim_core::model::dimensionless_regime(&p);
    println!(
        "gS/t = {:.4e}, h_zS/t = {:.4e}, h_xS/t = {:.4e}, detuning_ok = {}, ordered_window_hint = {}",
        rep.g_s_over_t, rep.hz_s_over_t, rep.hx_s_over_t, rep.detuning_ok, rep.neel_window_hint
    );
    if let Some(gamma) = cfg.model.gyromagnetic_mev_per_tesla {
        println!(
            "h_z = {:.4e} meV = {:.4e} T at {} meV/T",
            p.h_z,
            p.h_z / gamma,
            gamma
        );
    }
    std::fs::create_dir_all(out)?;
    let path = out.join("regime.json");
    std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
    Ok(CommandOutcome { outputs: vec![path], all_converged: true })
}

fn apply_ratios(base: &ModelParams<f64>, gs: f64, hz: f64, hx: f64) -> ModelParams<f64> {
    base.clone().with_coupling_ratio(gs).with_field_ratios(hz, hx)
}

/// ED observables at the plateau midpoint of the configured electron count.
fn ed_report(
    graph: &donorsim_core::LatticeGraph64,
    p: &ModelParams<f64>,
    ed: &donorsim_core::ed::EdConfig,
) -> Result<ObservableReport<f64>> {
    let mut p0 = p.clone();
    p0.mu = 0.0;
    let coulomb = coulomb_matrix(graph, p0.v0, p0.lambda).map_err(|e| anyhow!("{e}"))?;
    let spec = full_spectrum(graph, &coulomb, &p0, None, ed).map_err(|e| anyhow!("{e}"))?;
    let n_e = p0.electron_count(graph.n_sites());
    // chemical potential at the midpoint of the n_e charge plateau
    let additions = transport::addition_energies(&spec);
    let mu = if n_e == 0 {
        additions[0] - 1.0
    } else if n_e >= graph.n_sites() {
        additions[graph.n_sites() - 1] + 1.0
    } else {
        0.5 * (additions[n_e - 1] + additions[n_e])
    };
    let ens = thermal_ensemble(&spec, p.beta, mu).map_err(|e| anyhow!("{e}"))?;
    Ok(report_from_ed(&spec, &ens, graph, p, "ed"))
}

/// `phase-diagram`: |n_z| and companions over a (gS/t, h_zS/t) grid.
pub fn phase_diagram(cfg: &Config, out: &Path, seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.phase_diagram;
    let graph = cfg.lattice.build()?;
    let mut base = cfg.model.to_params()?;
    if let Some(v0at) = section.v0_over_at {
        base.v0 = v0at * cfg.lattice.a_nm * base.t;
    }
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).map_err(|e| anyhow!("{e}"))?;
    let g_values = section.g_axis.values().map_err(|e| anyhow!("phase_diagram.g_axis: {e}"))?;
    let hz_values =
        section.hz_axis.values().map_err(|e| anyhow!("phase_diagram.hz_axis: {e}"))?;
    let ed_cfg = cfg.ed.to_config();

    // optional one-shot μ tuning for the grand-canonical solver
    let tuned_mu = match (section.solver.as_str(), section.tune_target_n) {
        ("fthfb", Some(target)) => {
            let p = apply_ratios(
                &base,
                *g_values.last().unwrap(),
                *hz_values.first().unwrap(),
                section.hx_s_over_t,
            );
            let scfg = cfg.solver.to_config(seed);
            let (mu, _) = tune_chemical_potential(&graph, &coulomb, &p, &scfg, target)
                .map_err(|e| anyhow!("{e}"))?;
            Some(mu)
        }
        _ => None,
    };

    let n_hz = hz_values.len();
    let grid: Vec<(usize, f64, f64)> = g_values
        .iter()
        .enumerate()
        .flat_map(|(ig, &g)| {
            hz_values
                .iter()
                .enumerate()
                .map(move |(ih, &hz)| (ig * n_hz + ih, g, hz))
                .collect::<Vec<_>>()
        })
        .collect();

    let solver_name = section.solver.clone();
    let run_point = |point: usize,
                     gs: f64,
                     hz: f64,
                     warm: Option<&donorsim_core::MeanFieldState64>|
     -> Result<(Vec<Row>, bool, Option<donorsim_core::MeanFieldState64>)> {
        let mut p = apply_ratios(&base, gs, hz, section.hx_s_over_t);
        if let Some(mu) = tuned_mu {
            p.mu = mu;
        }
        let coords = vec![("g_s_over_t".to_string(), gs), ("hz_s_over_t".to_string(), hz)];
        match solver_name.as_str() {
            "hf" | "fthfb" => {
                let kind = if solver_name == "hf" {
                    SolverKind::HartreeFockT0
                } else {
                    SolverKind::Fthfb
                };
                let scfg = cfg.solver.to_config(seed.wrapping_add(point as u64));
                let state = solve_with_start(&graph, &coulomb, &p, None, kind, &scfg, warm)
                    .map_err(|e| anyhow!("{e}"))?;
                let rep = report_from_meanfield(&state, &graph, &p, &solver_name);
                Ok((report_rows(point, &coords, &rep), state.converged, Some(state)))
            }
            "ed" => {
                let rep = ed_report(&graph, &p, &ed_cfg)?;
                Ok((report_rows(point, &coords, &rep), true, None))
            }
            other => bail!("phase_diagram.solver: unknown solver {other:?}"),
        }
    };

    let results: Result<Vec<(Vec<Row>, bool)>> = if section.warm_start {
        // chain along each g-row sequentially; rows stay independent
        g_values
            .par_iter()
            .enumerate()
            .map(|(ig, &gs)| {
                let mut rows = Vec::new();
                let mut ok = true;
                let mut warm: Option<donorsim_core::MeanFieldState64> = None;
                for (ih, &hz) in hz_values.iter().enumerate() {
                    let point = ig * hz_values.len() + ih;
                    let (r, conv, state) = run_point(point, gs, hz, warm.as_ref())?;
                    rows.extend(r);
                    ok &= conv;
                    warm = state;
                }
                Ok((rows, ok))
            })
            .collect()
    } else {
        grid.par_iter()
            .map(|&(point, gs, hz)| {
                let (rows, conv, _) = run_point(point, gs, hz, None)?;
                Ok((rows, conv))
            })
            .collect()
    };
    let results = results?;
    let all_converged = results.iter().all(|(_, ok)| *ok);
    let rows: Vec<Row> = results.into_iter().flat_map(|(r, _)| r).collect();
    let outputs = write_rows(out, "phase_diagram", rows)?;
    Ok(CommandOutcome { outputs, all_converged })
}

/// `confinement`: static potential V(d) between pinned domain walls.
pub fn confinement(cfg: &Config, out: &Path, seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.confinement;
    let graph = cfg.lattice.build()?;
    if graph.geometry != Geometry::Chain {
        bail!("confinement requires the chain geometry");
    }
    let base = cfg.model.to_params()?;
    let scfg = cfg.solver.to_config(seed);
    let combos: Vec<(usize, f64, f64, i64)> = section
        .v0_over_at
        .iter()
        .enumerate()
        .flat_map(|(iv, &v0)| {
            section
                .curves
                .iter()
                .enumerate()
                .map(move |(ig, c)| {
                    (iv * section.curves.len() + ig, v0, c.gs_over_t, c.extra_electrons)
                })
        })
        .collect();
    let results: Result<Vec<(Vec<Row>, bool)>> = combos
        .par_iter()
        .map(|&(combo, v0at, gs, extra)| {
            let mut p = apply_ratios(&base, gs, section.hz_s_over_t, section.hx_s_over_t);
            p.v0 = v0at * cfg.lattice.a_nm * p.t;
            p.extra_electrons = extra;
            let coulomb =
                coulomb_matrix(&graph, p.v0, p.lambda).map_err(|e| anyhow!("{e}"))?;
            let rows_v = static_potential(
                &graph,
                &coulomb,
                &p,
                &scfg,
                section.i0,
                &section.d_values,
                section.eps_over_t,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let mut ok = true;
            let rows = rows_v
                .iter()
                .enumerate()
                .flat_map(|(k, r)| {
                    ok &= r.converged;
                    let coords = vec![
                        ("v0_over_at".to_string(), v0at),
                        ("g_s_over_t".to_string(), gs),
                        ("extra_electrons".to_string(), extra as f64),
                        ("d".to_string(), r.d as f64),
                    ];
                    let point = combo * section.d_values.len() + k;
                    vec![
                        Row {
                            point,
                            coords: coords.clone(),
                            observable: "energy_mev".into(),
                            value: r.energy,
                            converged: r.converged,
                        },
                        Row {
                            point,
                            coords,
                            observable: "v_mev".into(),
                            value: r.v,
                            converged: r.converged,
                        },
                    ]
                })
                .collect();
            Ok((rows, ok))
        })
        .collect();
    let results = results?;
    let all_converged = results.iter().all(|(_, ok)| *ok);
    let rows: Vec<Row> = results.into_iter().flat_map(|(r, _)| r).collect();
    let outputs = write_rows(out, "confinement", rows)?;
    Ok(CommandOutcome { outputs, all_converged })
}

/// `charge-profile`: grand-canonical ⟨n⟩ landscape from ED.
pub fn charge_profile(cfg: &Config, out: &Path, _seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.charge_profile;
    let graph = cfg.lattice.build()?;
    let mut base = cfg.model.to_params()?;
    if let Some(v0at) = section.v0_over_at {
        base.v0 = v0at * cfg.lattice.a_nm * base.t;
    }
    base.h_x = section.hx_s_over_t * base.t / base.spin_s();
    let scale = base.t / base.spin_s();
    let gh: Vec<(f64, f64)> = section
        .g_axis
        .values()
        .map_err(|e| anyhow!("charge_profile.g_axis: {e}"))?
        .into_iter()
        .flat_map(|gs| {
            section
                .hz_axis
                .values()
                .unwrap_or_default()
                .into_iter()
                .map(move |hz| (gs * scale * 1e3, hz * scale))
        })
        .collect();
    let beta = Beta::Finite(beta_from_mk(section.temperature_mk));
    let mu = section.mu_over_t * base.t;
    let rows_raw = donorsim_core::ed::total_charge_profile(
        &graph,
        &base,
        beta,
        &[mu],
        &gh,
        &cfg.ed.to_config(),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let rows: Vec<Row> = rows_raw
        .iter()
        .enumerate()
        .flat_map(|(point, r)| {
            let coords = vec![
                ("g_s_over_t".to_string(), r.g_uev * 1e-3 * base.spin_s() / base.t),
                ("hz_s_over_t".to_string(), r.h_z * base.spin_s() / base.t),
                ("mu_mev".to_string(), r.mu),
            ];
            vec![
                Row {
                    point,
                    coords: coords.clone(),
                    observable: "total_n".into(),
                    value: r.total_n,
                    converged: true,
                },
                Row {
                    point,
                    coords,
                    observable: "n_z_abs".into(),
                    value: r.n_z.abs(),
                    converged: true,
                },
            ]
        })
        .collect();
    let outputs = write_rows(out, "charge_profile", rows)?;
    Ok(CommandOutcome { outputs, all_converged: true })
}

/// `conductance`: normalized linear-conductance curves per h_z.
pub fn conductance(cfg: &Config, out: &Path, _seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.conductance;
    let graph = cfg.lattice.build()?;
    let base = cfg.model.to_params()?;
    let scale = base.t / base.spin_s();
    let h_z_values: Vec<f64> = section.hz_s_over_t_values.iter().map(|r| r * scale).collect();
    if h_z_values.is_empty() {
        let outputs = write_rows(out, "conductance", Vec::new())?;
        return Ok(CommandOutcome { outputs, all_converged: true });
    }
    let probe = transport::ProbeSetup::columns(
        &graph,
        section.gamma,
        section.t_reservoir_mk,
        section.t_island_mk,
    )
    .map_err(|e| anyhow!("{e}"))?;

    // μ grid: explicit window, or refined windows around the addition
    // energies of the first field value
    let mus: Vec<f64> = match (section.mu_min_mev, section.mu_max_mev) {
        (Some(lo), Some(hi)) => {
            let n = section.mu_points.max(2);
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
        _ => {
            let mut p = base.clone();
            p.h_z = h_z_values[0];
            p.mu = 0.0;
            let coulomb =
                coulomb_matrix(&graph, p.v0, p.lambda).map_err(|e| anyhow!("{e}"))?;
            let spec = full_spectrum(&graph, &coulomb, &p, None, &cfg.ed.to_config())
                .map_err(|e| anyhow!("{e}"))?;
            let additions = transport::addition_energies(&spec);
            let kt = donorsim_core::K_B_MEV_PER_K * 1e-3 * section.t_reservoir_mk;
            let half = section.window_kt * kt;
            let per = section.mu_points.max(3);
            let mut mus: Vec<f64> = additions
                .iter()
                .flat_map(|&a| {
                    (0..per).map(move |k| a - half + 2.0 * half * k as f64 / (per - 1) as f64)
                })
                .collect();
            mus.sort_by(|x, y| x.partial_cmp(y).unwrap());
            mus.dedup_by(|a, b| (*a - *b).abs() < kt * 1e-6);
            mus
        }
    };

    let curves = transport::conductance_sweep(
        &graph,
        &base,
        &probe,
        &mus,
        &h_z_values,
        &cfg.ed.to_config(),
    )
    .map_err(|e| anyhow!("{e}"))?;

    let mut rows = Vec::new();
    for (ic, curve) in curves.iter().enumerate() {
        let hz_ratio = section.hz_s_over_t_values[ic];
        for (k, &mu) in curve.mus.iter().enumerate() {
            let coords = vec![
                ("hz_s_over_t".to_string(), hz_ratio),
                ("mu_mev".to_string(), mu),
            ];
            let point = ic * curve.mus.len() + k;
            rows.push(Row {
                point,
                coords: coords.clone(),
                observable: "g_raw".into(),
                value: curve.g_raw[k],
                converged: true,
            });
            rows.push(Row {
                point,
                coords: coords.clone(),
                observable: "g_normalized".into(),
                value: curve.g_normalized[k],
                converged: true,
            });
            let is_peak = curve.peaks.iter().any(|pk| pk.mu == mu);
            rows.push(Row {
                point,
                coords,
                observable: "peak_flag".into(),
                value: if is_peak { 1.0 } else { 0.0 },
                converged: true,
            });
        }
    }
    let mut outputs = write_rows(out, "conductance", rows)?;
    // peak metadata sidecar
    let meta: Vec<serde_json::Value> = curves
        .iter()
        .zip(&section.hz_s_over_t_values)
        .map(|(c, hz)| {
            serde_json::json!({
                "hz_s_over_t": hz,
                "t_reservoir_mk": c.t_reservoir_mk,
                "t_island_mk": c.t_island_mk,
                "peaks": c.peaks.iter().map(|p| serde_json::json!({
                    "mu_mev": p.mu,
                    "height_normalized": p.height_normalized,
                    "half_width_mev": p.half_width,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let meta_path = out.join("conductance_peaks.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)?;
    outputs.push(meta_path);
    Ok(CommandOutcome { outputs, all_converged: true })
}

/// `bands`: dispersion tables, Fermi-surface locus, and the gapped-spectrum
/// check.
pub fn bands(cfg: &Config, out: &Path, _seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.bands;
    let p = cfg.model.to_params()?;
    let a = cfg.lattice.a_nm;
    let n = section.resolution.max(8);
    let mut rows = Vec::new();
    let square = donorsim_core::bands::square_band_grid(p.t, a, n);
    for (k, (kp, e)) in square.k_points.iter().zip(&square.bands).enumerate() {
        rows.push(Row {
            point: k,
            coords: vec![
                ("k_x".to_string(), kp[0]),
                ("k_y".to_string(), kp[1]),
            ],
            observable: "square_band".into(),
            value: e[0],
            converged: true,
        });
    }
    let honey = donorsim_core::bands::honeycomb_band_grid(p.t, a, n);
    for (k, (kp, e)) in honey.k_points.iter().zip(&honey.bands).enumerate() {
        let coords = vec![("k_x".to_string(), kp[0]), ("k_y".to_string(), kp[1])];
        rows.push(Row {
            point: square.k_points.len() + k,
            coords: coords.clone(),
            observable: "honeycomb_lower".into(),
            value: e[0],
            converged: true,
        });
        rows.push(Row {
            point: square.k_points.len() + k,
            coords,
            observable: "honeycomb_upper".into(),
            value: e[1],
            converged: true,
        });
    }
    let base_pt = square.k_points.len() + honey.k_points.len();
    for (k, kp) in donorsim_core::bands::fermi_surface_locus::<f64>(a, n).iter().enumerate() {
        rows.push(Row {
            point: base_pt + k,
            coords: vec![("k_x".to_string(), kp[0]), ("k_y".to_string(), kp[1])],
            observable: "fermi_surface".into(),
            value: 0.0,
            converged: true,
        });
    }
    let outputs = write_rows(out, "bands", rows)?;

    let gap_min = donorsim_core::bands::gapped_square_min(
        p.t,
        p.g_mev(),
        p.spin_s(),
        section.phi0,
        a,
        n,
    );
    let summary = serde_json::json!({
        "gap_minimum_mev": gap_min,
        "expected_gs_phi0_mev": p.g_mev() * p.spin_s() * section.phi0.abs(),
        "fermi_velocity_chain_mev_nm": 2.0 * p.t * a,
        "fermi_velocity_honeycomb_mev_nm": 1.5 * p.t * a,
    });
    let path = out.join("bands_summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    let mut outputs = outputs;
    outputs.push(path);
    Ok(CommandOutcome { outputs, all_converged: true })
}

/// `correlators`: ⟨c_{i0}† c_{i0+d}⟩ profile plus both decay-family fits.
pub fn correlators(cfg: &Config, out: &Path, seed: u64) -> Result<CommandOutcome> {
    let section = &cfg.correlators;
    let graph = cfg.lattice.build()?;
    let p = cfg.model.to_params()?;
    let n = graph.n_sites();
    let i0 = section.i0.unwrap_or(n / 2);
    let d_max = section.d_max.unwrap_or(match graph.boundary {
        donorsim_core::lattice::Boundary::Periodic => n / 2,
        donorsim_core::lattice::Boundary::Open => n.saturating_sub(i0 + 2),
    });
    let coulomb = coulomb_matrix(&graph, p.v0, p.lambda).map_err(|e| anyhow!("{e}"))?;

    let (profile, converged) = match section.solver.as_str() {
        "hf" | "fthfb" => {
            let kind = if section.solver == "hf" {
                SolverKind::HartreeFockT0
            } else {
                SolverKind::Fthfb
            };
            let scfg = cfg.solver.to_config(seed);
            let state =
                solve(&graph, &coulomb, &p, None, kind, &scfg).map_err(|e| anyhow!("{e}"))?;
            let prof = donorsim_core::observables::correlator_profile_meanfield(
                &state.rho,
                graph.boundary,
                i0,
                d_max,
            )
            .map_err(|e| anyhow!("{e}"))?;
            (prof, state.converged)
        }
        "ed" => {
            let mut p0 = p.clone();
            p0.mu = 0.0;
            let spec = full_spectrum(&graph, &coulomb, &p0, None, &cfg.ed.to_config())
                .map_err(|e| anyhow!("{e}"))?;
            let additions = transport::addition_energies(&spec);
            let n_e = p0.electron_count(n).clamp(1, n - 1);
            let mu = 0.5 * (additions[n_e - 1] + additions[n_e]);
            let ens = thermal_ensemble(&spec, p.beta, mu).map_err(|e| anyhow!("{e}"))?;
            let prof = donorsim_core::observables::correlator_profile_ed(
                &spec,
                &ens,
                graph.boundary,
                i0,
                d_max,
            )
            .map_err(|e| anyhow!("{e}"))?;
            (prof, true)
        }
        other => bail!("correlators.solver: unknown solver {other:?}"),
    };

    let rows: Vec<Row> = profile
        .iter()
        .enumerate()
        .map(|(d, &v)| Row {
            point: d,
            coords: vec![("d".to_string(), d as f64)],
            observable: "correlator".into(),
            value: v,
            converged,
        })
        .collect();
    let mut outputs = write_rows(out, "correlators", rows)?;

    // fit both families on d >= 1
    if profile.len() >= 9 {
        let ds: Vec<f64> = (1..profile.len()).map(|d| d as f64).collect();
        let ys: Vec<f64> = profile[1..].to_vec();
        let (osc, exp) = donorsim_core::fit::cdw_fit(&ds, &ys).map_err(|e| anyhow!("{e}"))?;
        let fit = serde_json::json!({
            "oscillatory": {
                "rho0": osc.rho0, "amplitude": osc.amplitude,
                "frequency": osc.frequency, "delta": osc.delta, "mse": osc.mse,
            },
            "exponential": {
                "offset": exp.offset, "amplitude": exp.amplitude,
                "gamma": exp.gamma, "mse": exp.mse,
            },
        });
        let path = out.join("correlators_fit.json");
        std::fs::write(&path, serde_json::to_string_pretty(&fit)?)?;
        outputs.push(path);
    }
    Ok(CommandOutcome { outputs, all_converged: converged })
}
