//! End-to-end acceptance suite. One test per criterion; each prints a
//! PASS line with its headline numbers (run with `--nocapture` to see all).

mod common;

use common::{spearman, DenseOracle};
use donorsim_core::bands;
use donorsim_core::ed::{
    full_spectrum, thermal_correlator, thermal_ensemble, thermal_site_density, thermal_spin_x,
    thermal_spin_z, thermal_spin_zz_ref, thermal_total_charge, total_charge_profile, EdConfig,
};
use donorsim_core::lattice::{build_lattice, coulomb_matrix, Boundary, Geometry};
use donorsim_core::meanfield::{
    one_iteration, solve, solve_with_start, tune_chemical_potential, MeanFieldState, SolverConfig,
    SolverKind,
};
use donorsim_core::model::{dimensionless_regime, site_potentials, Beta, ModelParams};
use donorsim_core::observables::{
    neel_order_correlators, neel_order_spins, pairing_average, static_potential,
};
use donorsim_core::transport;
use donorsim_core::{beta_from_mk, CoulombMatrix64, LatticeGraph64};
use std::time::Instant;

const A_NM: f64 = 4.7;

fn base_params() -> ModelParams<f64> {
    ModelParams::<f64>::default()
}

fn solver_cfg() -> SolverConfig<f64> {
    SolverConfig { tolerance: 1e-9, max_iterations: 4000, ..SolverConfig::default() }
}

/// Criterion 12's invariant bundle, applied to every converged mean-field
/// state produced by criteria 2-6.
fn check_meanfield_invariants(
    state: &MeanFieldState<f64>,
    graph: &LatticeGraph64,
    coulomb: &CoulombMatrix64,
    p: &ModelParams<f64>,
    pinning: Option<&donorsim_core::model::PinningPattern<f64>>,
    kind: SolverKind,
    cfg: &SolverConfig<f64>,
) {
    if !state.converged {
        return;
    }
    // ρ eigenvalues in [-1e-8, 1+1e-8], K antisymmetric, UU† + VV† = 1,
    // UVᵀ + VUᵀ = 0, |⟨I⟩| ≤ S
    state.check_invariants(p.spin_s()).expect("mean-field state invariants");
    // Ω non-increasing after the first 5 iterations
    for (k, w) in state.omega_trace.windows(2).enumerate() {
        if k + 2 > 5 {
            assert!(
                w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()),
                "Ω increased at accepted iterate {}: {} -> {}",
                k + 2,
                w[0],
                w[1]
            );
        }
    }
    // fixed-point idempotence within 2x tolerance
    let next = one_iteration(graph, coulomb, p, pinning, kind, cfg, state).unwrap();
    let mut change = donorsim_core::linalg::max_abs_diff(&state.rho, &next.rho);
    change = change.max(donorsim_core::linalg::max_abs_diff(&state.pairing, &next.pairing));
    for (a, b) in state.spins.iter().zip(&next.spins) {
        for c in 0..3 {
            change = change.max((a[c] - b[c]).abs());
        }
    }
    assert!(
        change < 2.0 * cfg.tolerance,
        "fixed-point idempotence violated: one iteration moved the state by {change:e}"
    );
}

#[test]
fn criterion_01_regime_arithmetic() {
    let t0 = Instant::now();
    let p = base_params();
    let rep = dimensionless_regime(&p);
    let expect = 3.2e-5;
    assert!(
        (rep.g_s_over_t - expect).abs() / expect < 0.01,
        "gS/t = {} differs from 3.2e-5 by more than 1%",
        rep.g_s_over_t
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "runtime {elapsed:.3}s exceeds 1s");
    println!("[criterion 1] PASS: gS/t = {:.4e} (runtime {elapsed:.4}s)", rep.g_s_over_t);
}

#[test]
fn criterion_02_two_phase_structure_1d() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Chain, 43, 1, A_NM, Boundary::Periodic).unwrap();
    let mut base = base_params();
    base.v0 = 1.1 * A_NM * base.t; // V0/(at) = 1.1
    base.extra_electrons = 1; // one fermion above half filling
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).unwrap();
    let cfg = solver_cfg();
    let gs = 0.5;
    // the ordered window sits at compensating (negative) detuning
    let hz_scan = [
        0.0, -0.05, -0.10, -0.15, -0.20, -0.25, -0.30, -0.35, -0.40, -0.60, -1.00,
    ];
    let mut ordered = Vec::new();
    for (k, &hz) in hz_scan.iter().enumerate() {
        let p = base.clone().with_coupling_ratio(gs).with_field_ratios(hz, 0.01);
        let state = solve(&graph, &coulomb, &p, None, SolverKind::HartreeFockT0, &cfg).unwrap();
        let nz = neel_order_spins(&state.spins, &graph.sublattice, p.spin_s()).abs();
        check_meanfield_invariants(
            &state,
            &graph,
            &coulomb,
            &p,
            None,
            SolverKind::HartreeFockT0,
            &cfg,
        );
        ordered.push((k, hz, nz));
    }
    let nz_at = |hz: f64| ordered.iter().find(|(_, h, _)| *h == hz).unwrap().2;
    // |n_z| > 0.5 inside the ordered window, < 0.1 in the trivial region
    assert!(nz_at(-0.25) > 0.5, "Néel point |n_z| = {}", nz_at(-0.25));
    assert!(nz_at(-1.0) < 0.1, "trivial point |n_z| = {}", nz_at(-1.0));
    assert!(nz_at(0.0) < 0.1, "trivial point at h_z = 0: |n_z| = {}", nz_at(0.0));
    // the ordered region forms a finite window: contiguous, with disordered
    // points on both sides of the scan
    let flags: Vec<bool> = ordered.iter().map(|(_, _, nz)| *nz > 0.5).collect();
    let first = flags.iter().position(|&f| f).expect("window exists");
    let last = flags.iter().rposition(|&f| f).unwrap();
    assert!(flags[first..=last].iter().all(|&f| f), "ordered window not contiguous: {flags:?}");
    assert!(first > 0 && last < flags.len() - 1, "window not bounded: {flags:?}");
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "runtime {elapsed:.1}s exceeds 10 min");
    println!(
        "[criterion 2] PASS: 43-site chain window h_zS/t in [{:.2}, {:.2}], Néel |n_z| = {:.3}, trivial |n_z| = {:.3} (runtime {elapsed:.1}s)",
        ordered[last].1, ordered[first].1, nz_at(-0.25), nz_at(-1.0)
    );
}

#[test]
fn criterion_03_two_phase_structure_2d() {
    let t0 = Instant::now();
    let cfg = SolverConfig { tolerance: 1e-8, max_iterations: 2500, ..SolverConfig::default() };

    // square lattice, Fig. 5 settings at β = 10³
    let graph = build_lattice::<f64>(Geometry::Square, 10, 10, A_NM, Boundary::Periodic).unwrap();
    let mut base = base_params();
    base.v0 = 1.1 * A_NM * base.t;
    base.beta = Beta::Finite(1e3);
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).unwrap();
    let mut p_neel = base.clone().with_coupling_ratio(1.0).with_field_ratios(-0.45, 0.01);
    let (mu_sq, state) = tune_chemical_potential(&graph, &coulomb, &p_neel, &cfg, 50.0).unwrap();
    assert!((state.total_n - 50.0).abs() < 0.5, "square filling {}", state.total_n);
    let nz_neel = neel_order_spins(&state.spins, &graph.sublattice, p_neel.spin_s()).abs();
    assert!(nz_neel > 0.5, "square Néel point |n_z| = {nz_neel}");
    p_neel.mu = mu_sq; // the tuned state is a fixed point at the tuned μ
    check_meanfield_invariants(&state, &graph, &coulomb, &p_neel, None, SolverKind::Fthfb, &cfg);

    let mut p_triv = base.clone().with_coupling_ratio(1.0).with_field_ratios(0.0, 0.01);
    p_triv.mu = mu_sq;
    let s_triv = solve(&graph, &coulomb, &p_triv, None, SolverKind::Fthfb, &cfg).unwrap();
    let nz_triv = neel_order_spins(&s_triv.spins, &graph.sublattice, p_triv.spin_s()).abs();
    assert!(nz_triv < 0.1, "square trivial point |n_z| = {nz_triv}");
    check_meanfield_invariants(&s_triv, &graph, &coulomb, &p_triv, None, SolverKind::Fthfb, &cfg);

    // honeycomb, 72 sites, β = 10³
    let honey = build_lattice::<f64>(Geometry::Honeycomb, 6, 6, A_NM, Boundary::Periodic).unwrap();
    let coul_h = coulomb_matrix(&honey, base.v0, base.lambda).unwrap();
    let mut ph_neel = base.clone().with_coupling_ratio(0.5).with_field_ratios(-0.25, 0.01);
    let (mu_h, sh) = tune_chemical_potential(&honey, &coul_h, &ph_neel, &cfg, 36.0).unwrap();
    assert!((sh.total_n - 36.0).abs() < 0.5, "honeycomb filling {}", sh.total_n);
    let nz_h = neel_order_spins(&sh.spins, &honey.sublattice, ph_neel.spin_s()).abs();
    assert!(nz_h > 0.5, "honeycomb Néel point |n_z| = {nz_h}");
    ph_neel.mu = mu_h;
    check_meanfield_invariants(&sh, &honey, &coul_h, &ph_neel, None, SolverKind::Fthfb, &cfg);

    let mut ph_triv = base.clone().with_coupling_ratio(0.5).with_field_ratios(0.0, 0.01);
    ph_triv.mu = mu_h;
    let sh_triv = solve(&honey, &coul_h, &ph_triv, None, SolverKind::Fthfb, &cfg).unwrap();
    let nz_ht = neel_order_spins(&sh_triv.spins, &honey.sublattice, ph_triv.spin_s()).abs();
    assert!(nz_ht < 0.1, "honeycomb trivial point |n_z| = {nz_ht}");
    check_meanfield_invariants(&sh_triv, &honey, &coul_h, &ph_triv, None, SolverKind::Fthfb, &cfg);

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 3600.0, "runtime {elapsed:.1}s exceeds 1 h");
    println!(
        "[criterion 3] PASS: square |n_z| = {nz_neel:.3}/{nz_triv:.3}, honeycomb |n_z| = {nz_h:.3}/{nz_ht:.3} (runtime {elapsed:.1}s)"
    );
}

#[test]
fn criterion_04_confinement_deconfinement() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Chain, 42, 1, A_NM, Boundary::Periodic).unwrap();
    let cfg = solver_cfg();
    let d_list = [2usize, 4, 6, 8, 10, 12, 14];
    let ds: Vec<f64> = d_list.iter().map(|&d| d as f64).collect();
    let mut verdicts = Vec::new();
    for &v0_at in &[0.0, 3.6] {
        // confined: exact half filling (the two walls share one mid-gap
        // electron); deconfined below the coupling threshold with the extra
        // electron released
        for &(gs, extra, confined) in &[(1.0, 0i64, true), (0.2, 1, false)] {
            let mut p = base_params().with_coupling_ratio(gs).with_field_ratios(-0.4, 0.01);
            p.v0 = v0_at * A_NM * p.t;
            p.extra_electrons = extra;
            let coulomb = coulomb_matrix(&graph, p.v0, p.lambda).unwrap();
            let rows = static_potential(&graph, &coulomb, &p, &cfg, 13, &d_list, 0.05).unwrap();
            let vs: Vec<f64> = rows.iter().map(|r| r.v).collect();
            let rho = spearman(&ds, &vs);
            if confined {
                assert!(
                    rho > 0.9,
                    "confined verdict failed at V0/(at) = {v0_at}: ρ = {rho:.3}, V = {vs:?}"
                );
            } else {
                assert!(
                    rho < -0.9,
                    "deconfined verdict failed at V0/(at) = {v0_at}: ρ = {rho:.3}, V = {vs:?}"
                );
            }
            verdicts.push((v0_at, gs, rho));
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 4] PASS: Spearman ρ = {:?} (runtime {elapsed:.1}s)",
        verdicts.iter().map(|(v, g, r)| format!("V0/at={v} gS/t={g}: {r:.2}")).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_05_thermal_and_transverse_restoration() {
    let t0 = Instant::now();
    // (a) FTHFB on the 10x10 square: Néel-region area shrinks from β = 10³
    // to β = 10 on a grid straddling the window edge
    let graph = build_lattice::<f64>(Geometry::Square, 10, 10, A_NM, Boundary::Periodic).unwrap();
    let mut base = base_params();
    base.v0 = 1.1 * A_NM * base.t;
    base.beta = Beta::Finite(1e3);
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).unwrap();
    let cfg = SolverConfig { tolerance: 1e-8, max_iterations: 2500, ..SolverConfig::default() };
    // thermal melting is resolved where the ordering scale gS Δρ is
    // comparable to 1/β = 0.1 meV, i.e. at small couplings
    let p_tune = base.clone().with_coupling_ratio(0.05).with_field_ratios(-0.025, 0.01);
    let (mu, _) = tune_chemical_potential(&graph, &coulomb, &p_tune, &cfg, 50.0).unwrap();
    let mut areas = Vec::new();
    for &beta in &[1e3, 10.0] {
        let mut area = 0usize;
        for &gs in &[0.05, 0.08] {
            for k in 0..5 {
                let hz = -gs / 2.0 * (0.8 + 0.1 * k as f64);
                let mut p = base.clone().with_coupling_ratio(gs).with_field_ratios(hz, 0.01);
                p.beta = Beta::Finite(beta);
                p.mu = mu;
                let state = solve(&graph, &coulomb, &p, None, SolverKind::Fthfb, &cfg).unwrap();
                let nz = neel_order_spins(&state.spins, &graph.sublattice, p.spin_s()).abs();
                if nz > 0.5 {
                    area += 1;
                }
                check_meanfield_invariants(
                    &state,
                    &graph,
                    &coulomb,
                    &p,
                    None,
                    SolverKind::Fthfb,
                    &cfg,
                );
            }
        }
        areas.push(area);
    }
    assert!(
        areas[1] < areas[0],
        "β = 10 area {} not strictly smaller than β = 10³ area {}",
        areas[1],
        areas[0]
    );

    // (b) transverse-field analog on the 2x2 ED diagram at V0/(at) = 3.6
    let plaq = build_lattice::<f64>(Geometry::Square, 2, 2, A_NM, Boundary::Open).unwrap();
    let mut areas_hx = Vec::new();
    for &hx in &[0.01, 0.3] {
        let mut area = 0usize;
        for &gs in &[0.2, 0.5, 1.0] {
            for k in 0..10 {
                let hz = -0.08 * k as f64;
                let mut p = base_params().with_coupling_ratio(gs).with_field_ratios(hz, hx);
                p.v0 = 3.6 * A_NM * p.t;
                p.mu = 0.0;
                let coul = coulomb_matrix(&plaq, p.v0, p.lambda).unwrap();
                let spec = full_spectrum(&plaq, &coul, &p, None, &EdConfig::default()).unwrap();
                // half filling: μ at the middle of the n = 2 plateau
                let e = transport::addition_energies(&spec);
                let mu_mid = 0.5 * (e[1] + e[2]);
                let ens = thermal_ensemble(&spec, Beta::Infinite, mu_mid).unwrap();
                let zz = thermal_spin_zz_ref(&spec, &ens, 0);
                let nz = neel_order_correlators(&zz, &plaq.sublattice, p.spin_s());
                if nz.abs() > 0.5 {
                    area += 1;
                }
            }
        }
        areas_hx.push(area);
    }
    assert!(
        areas_hx[1] < areas_hx[0],
        "larger h_x area {} not strictly smaller than {}",
        areas_hx[1],
        areas_hx[0]
    );
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 5] PASS: thermal areas {}→{} (β=10³→10), transverse areas {}→{} (h_xS/t 0.01→0.3) (runtime {elapsed:.1}s)",
        areas[0], areas[1], areas_hx[0], areas_hx[1]
    );
}

#[test]
fn criterion_06_pairing_nullity() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Square, 10, 10, A_NM, Boundary::Periodic).unwrap();
    let mut base = base_params();
    base.v0 = 3.6 * A_NM * base.t;
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).unwrap();
    let cfg = SolverConfig { tolerance: 1e-8, max_iterations: 2500, ..SolverConfig::default() };
    base = base.with_coupling_ratio(0.5).with_field_ratios(-0.25, 0.01);
    // μ range spanning the occupation ramp around the Hartree-shifted center
    let n = graph.n_sites();
    let rowsum: f64 = (0..n).map(|j| coulomb.v[(0, j)]).sum();
    let center = 0.5 * rowsum;
    let mut max_ktilde: f64 = 0.0;
    let mut occupations = Vec::new();
    for &beta in &[1e3, 10.0] {
        let mut warm: Option<MeanFieldState<f64>> = None;
        let mut ns = Vec::new();
        for k in 0..9 {
            let mu = center - 24.0 + 6.0 * k as f64;
            let mut p = base.clone();
            p.beta = Beta::Finite(beta);
            p.mu = mu;
            let state =
                solve_with_start(&graph, &coulomb, &p, None, SolverKind::Fthfb, &cfg, warm.as_ref())
                    .unwrap();
            if state.converged {
                let kt = pairing_average(&state.pairing);
                assert!(kt < 1e-6, "K̃ = {kt:e} at μ = {mu}, β = {beta}");
                max_ktilde = max_ktilde.max(kt);
                check_meanfield_invariants(
                    &state,
                    &graph,
                    &coulomb,
                    &p,
                    None,
                    SolverKind::Fthfb,
                    &cfg,
                );
            }
            ns.push(state.total_n);
            warm = Some(state);
        }
        // total occupation is non-decreasing across the sweep
        for w in ns.windows(2) {
            assert!(w[1] >= w[0] - 1e-2, "⟨n⟩ not monotone: {ns:?}");
        }
        occupations.push(ns);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 6] PASS: max K̃ = {max_ktilde:.2e} over μ sweep at β ∈ {{10³, 10}}, ⟨n⟩ ramps {:.1}→{:.1} (runtime {elapsed:.1}s)",
        occupations[0][0], occupations[0][8]
    );
}

#[test]
fn criterion_07_ed_oracle_equivalence() {
    let t0 = Instant::now();
    // thermal expectations on N ≤ 2 match the dense full-trace oracle
    let graph = build_lattice::<f64>(Geometry::Chain, 2, 1, A_NM, Boundary::Open).unwrap();
    let mut worst: f64 = 0.0;
    for (t_hop, label) in [(1e-12, "single-site"), (7.5, "two-site")] {
        let mut p = base_params();
        p.t = t_hop;
        p.h_z = 0.21;
        p.h_x = 0.06;
        p.g_uev = 700.0;
        p.v0 = 30.0;
        let coulomb = coulomb_matrix(&graph, p.v0, p.lambda).unwrap();
        let pots = site_potentials(&p, &graph, None).unwrap();
        let oracle = DenseOracle::new(2, p.two_s);
        let h_full = oracle.hamiltonian(&graph, &coulomb.v, &p, &pots);
        let spec = full_spectrum(&graph, &coulomb, &p, None, &EdConfig::default()).unwrap();
        for beta in [Beta::Finite(0.7), Beta::Finite(12.0)] {
            for mu in [-0.4, 0.5] {
                let ens = thermal_ensemble(&spec, beta, mu).unwrap();
                let mut record = |have: f64, want: f64| {
                    let err = (have - want).abs();
                    worst = worst.max(err);
                    assert!(err < 1e-10, "{label}: {have} vs {want}");
                };
                record(
                    thermal_total_charge(&spec, &ens),
                    oracle.thermal_expectation(&h_full, beta, mu, &oracle.total_number()),
                );
                let dens = thermal_site_density(&spec, &ens);
                let sz = thermal_spin_z(&spec, &ens);
                let sx = thermal_spin_x(&spec, &ens);
                let zz = thermal_spin_zz_ref(&spec, &ens, 0);
                for i in 0..2 {
                    record(
                        dens[i],
                        oracle.thermal_expectation(&h_full, beta, mu, &oracle.number_op(i)),
                    );
                    record(sz[i], oracle.thermal_expectation(&h_full, beta, mu, &oracle.spin_z(i)));
                    record(sx[i], oracle.thermal_expectation(&h_full, beta, mu, &oracle.spin_x(i)));
                    let op = oracle.spin_z(0) * oracle.spin_z(i);
                    record(zz[i], oracle.thermal_expectation(&h_full, beta, mu, &op));
                    for j in 0..2 {
                        record(
                            thermal_correlator(&spec, &ens, i, j),
                            oracle.thermal_expectation(
                                &h_full,
                                beta,
                                mu,
                                &oracle.correlator_op(i, j),
                            ),
                        );
                    }
                }
            }
        }
    }
    // fermionic anticommutators to 1e-12 on N ≤ 3 (assembled from the
    // sector-blocked machinery)
    for n_sites in [2usize, 3] {
        let spin_dim = 2usize.pow(n_sites as u32);
        let dim: usize = (1 << n_sites) * spin_dim;
        let ops: Vec<nalgebra::DMatrix<f64>> = (0..n_sites)
            .map(|site| {
                let mut bases = Vec::new();
                let mut offsets = Vec::new();
                let mut total = 0usize;
                for ne in 0..=n_sites {
                    let b = donorsim_core::ed::ManyBodyBasis::new(n_sites, 1, ne).unwrap();
                    offsets.push(total);
                    total += b.dim();
                    bases.push(b);
                }
                let mut c = nalgebra::DMatrix::<f64>::zeros(total, total);
                for ne in 1..=n_sites {
                    let (upper, lower) = (&bases[ne], &bases[ne - 1]);
                    for oi in 0..upper.occupations.len() {
                        if let Some((nb, sign)) =
                            donorsim_core::ed::annihilate(upper.bits(oi), site)
                        {
                            let ro = lower.rank_of(nb).unwrap();
                            for si in 0..upper.spin_dim {
                                c[(
                                    offsets[ne - 1] + lower.index(ro, si),
                                    offsets[ne] + upper.index(oi, si),
                                )] = sign as f64;
                            }
                        }
                    }
                }
                c
            })
            .collect();
        for i in 0..n_sites {
            for j in 0..n_sites {
                let anti = &ops[i] * ops[j].transpose() + ops[j].transpose() * &ops[i];
                let expect = if i == j { 1.0 } else { 0.0 };
                for r in 0..dim {
                    for cidx in 0..dim {
                        let want = if r == cidx { expect } else { 0.0 };
                        assert!(
                            (anti[(r, cidx)] - want).abs() < 1e-12,
                            "anticommutator ({i},{j}) at ({r},{cidx})"
                        );
                    }
                }
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10 s");
    println!(
        "[criterion 7] PASS: worst thermal deviation {worst:.2e} (< 1e-10), anticommutators exact to 1e-12 (runtime {elapsed:.2}s)"
    );
}

#[test]
fn criterion_08_hf_ed_cross_check() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Chain, 4, 1, A_NM, Boundary::Periodic).unwrap();
    let mut p = base_params().with_coupling_ratio(0.5).with_field_ratios(-0.25, 0.01);
    p.v0 = 1.1 * A_NM * p.t;
    let coulomb = coulomb_matrix(&graph, p.v0, p.lambda).unwrap();
    // ED ground state at half filling (n = 2 sector via the plateau middle)
    let mut p0 = p.clone();
    p0.mu = 0.0;
    let spec = full_spectrum(&graph, &coulomb, &p0, None, &EdConfig::default()).unwrap();
    let e_ed = spec.sectors[2].evals[0];
    let additions = transport::addition_energies(&spec);
    let mu_mid = 0.5 * (additions[1] + additions[2]);
    let ens = thermal_ensemble(&spec, Beta::Infinite, mu_mid).unwrap();
    let zz = thermal_spin_zz_ref(&spec, &ens, 0);
    // HF at fixed N = 2
    let cfg = SolverConfig { tolerance: 1e-10, ..SolverConfig::default() };
    let state = solve(&graph, &coulomb, &p, None, SolverKind::HartreeFockT0, &cfg).unwrap();
    assert!(state.converged);
    let e_hf = state.energy;
    assert!(e_hf >= e_ed - 1e-9, "variational bound violated: {e_hf} < {e_ed}");
    let gap = (e_hf - e_ed) / e_ed.abs();
    assert!(gap < 0.10, "relative gap {gap:.3} >= 10%");
    // staggered sign structure matches
    for j in 1..4 {
        let hf = state.spins[0][2] * state.spins[j][2];
        assert!(
            hf.signum() == zz[j].signum(),
            "sign mismatch at site {j}: HF {hf:+.3}, ED {:+.3}",
            zz[j]
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 8] PASS: E_HF = {e_hf:.4} >= E_ED = {e_ed:.4}, relative gap {:.3e}, staggered signs match (runtime {elapsed:.1}s)",
        gap
    );
}

#[test]
fn criterion_09_band_structure() {
    let t0 = Instant::now();
    let t_hop = 7.5;
    // honeycomb bands vanish at K
    let kk = bands::honeycomb_k_point::<f64>(A_NM);
    let (lo, hi) = bands::honeycomb_bands(kk, t_hop, A_NM);
    assert!(hi.abs() < 1e-12 && lo.abs() < 1e-12, "bands at K: {lo}, {hi}");
    // Fermi velocity 3ta/2 within 0.1%
    let vf = 1.5 * t_hop * A_NM;
    for dir in [[1.0, 0.0], [0.0, 1.0], [-0.6, 0.8], [0.3, -0.7]] {
        let v = bands::honeycomb_fermi_velocity(t_hop, A_NM, dir, 1e-4 / A_NM);
        assert!((v - vf).abs() / vf < 1e-3, "v_F = {v} along {dir:?}");
    }
    // gapped square spectrum: numerical gap = 2 gS|φ0| to grid resolution
    let g_mev = 0.3 * t_hop * 2.0; // gS = 0.3t with S = 1/2
    let phi0 = 0.8;
    let mass = g_mev * 0.5 * phi0;
    let min = bands::gapped_square_min(t_hop, g_mev, 0.5, phi0, A_NM, 500);
    assert!(
        (2.0 * min - 2.0 * mass).abs() < 1e-5 * t_hop,
        "gap {} vs 2gS|φ0| = {}",
        2.0 * min,
        2.0 * mass
    );
    // 1D linearized slope = 2ta within 0.1%
    let kf = std::f64::consts::FRAC_PI_2 / A_NM;
    let v1d = bands::chain_group_velocity(kf, t_hop, A_NM, 1e-4 / A_NM);
    assert!((v1d - 2.0 * t_hop * A_NM).abs() / (2.0 * t_hop * A_NM) < 1e-3);
    // nesting on 200 sampled Fermi-surface points
    for k in bands::fermi_surface_locus::<f64>(A_NM, 200) {
        assert!(bands::nesting_check(k, t_hop, A_NM, 1e-8).unwrap());
    }
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 9] PASS: Dirac point exact, v_F = 3ta/2 and 2ta within 0.1%, gap = 2gS|φ0|, nesting holds on 200 points (runtime {elapsed:.1}s)"
    );
}

#[test]
fn criterion_10_conductance() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Square, 2, 2, A_NM, Boundary::Open).unwrap();
    let mut base = base_params();
    base = base.with_coupling_ratio(4e-5).with_field_ratios(-1e-5, 0.0);
    base.h_x = 0.01 * base.h_z.abs();
    base.mu = 0.0;
    let coulomb = coulomb_matrix(&graph, base.v0, base.lambda).unwrap();
    let spec = full_spectrum(&graph, &coulomb, &base, None, &EdConfig::default()).unwrap();
    let additions = transport::addition_energies(&spec);

    // per-T_r curves on fine windows around every addition energy
    let t_rs = [10.0, 30.0, 100.0];
    let mut peak_positions: Vec<Vec<f64>> = Vec::new();
    let mut widths: Vec<f64> = Vec::new();
    let kt_max = donorsim_core::K_B_MEV_PER_K * 1e-3 * 100.0;
    let grid_step = kt_max * 25.0 * 2.0 / 800.0;
    for &tr in &t_rs {
        let probe = transport::ProbeSetup::columns(&graph, 1.0, tr, 0.01).unwrap();
        let mut mus: Vec<f64> = additions
            .iter()
            .flat_map(|&a| (0..=800).map(move |k| a - 25.0 * kt_max + grid_step * k as f64))
            .collect();
        mus.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let curve = transport::conductance_curve(&spec, &probe, &mus, base.h_z, base.g_uev).unwrap();
        assert!(curve.g_raw.iter().all(|&g| g >= 0.0 && g.is_finite()));
        let peaks: Vec<f64> = curve.peaks.iter().map(|p| p.mu).collect();
        assert!(!peaks.is_empty());
        let mean_width = {
            let ws: Vec<f64> = curve.peaks.iter().filter_map(|p| p.half_width).collect();
            assert!(!ws.is_empty());
            ws.iter().sum::<f64>() / ws.len() as f64
        };
        widths.push(mean_width);
        peak_positions.push(peaks);
    }
    // peak positions are T_r-independent (within 3 grid steps)
    for k in 1..t_rs.len() {
        assert_eq!(
            peak_positions[k].len(),
            peak_positions[0].len(),
            "peak count changed with T_r"
        );
        for (a, b) in peak_positions[k].iter().zip(&peak_positions[0]) {
            assert!((a - b).abs() <= 3.0 * grid_step, "peak moved: {a} vs {b}");
        }
    }
    // half-widths grow monotonically with T_r
    assert!(widths[0] < widths[1] && widths[1] < widths[2], "widths {widths:?}");

    // field dependence: the in-window h_z produces a different peak profile
    let scale = base.t / base.spin_s();
    let hz_ratios = [-2e-5, -2e-7, -2e-3]; // in-window, out (weak), out (strong)
    let mut profiles: Vec<Vec<f64>> = Vec::new();
    let mut nz_class: Vec<f64> = Vec::new();
    for &hzr in &hz_ratios {
        let mut p = base.clone();
        p.h_z = hzr * scale;
        p.h_x = 0.01 * p.h_z.abs().max(1e-12);
        let spec_h = full_spectrum(&graph, &coulomb, &p, None, &EdConfig::default()).unwrap();
        // classify the half-filled ground state
        let adds = transport::addition_energies(&spec_h);
        let mu_mid = 0.5 * (adds[1] + adds[2]);
        let ens = thermal_ensemble(&spec_h, Beta::Infinite, mu_mid).unwrap();
        let zz = thermal_spin_zz_ref(&spec_h, &ens, 0);
        nz_class.push(neel_order_correlators(&zz, &graph.sublattice, p.spin_s()).abs());
        let probe = transport::ProbeSetup::columns(&graph, 1.0, 10.0, 0.01).unwrap();
        let kt = donorsim_core::K_B_MEV_PER_K * 1e-3 * 10.0;
        let mut mus: Vec<f64> = transport::addition_energies(&spec_h)
            .iter()
            .chain(additions.iter())
            .flat_map(|&a| (0..=400).map(move |k| a - 30.0 * kt + 30.0 * kt * k as f64 / 200.0))
            .collect();
        mus.sort_by(|x, y| x.partial_cmp(y).unwrap());
        mus.dedup_by(|a, b| (*a - *b).abs() < kt * 1e-3);
        let curve = transport::conductance_curve(&spec_h, &probe, &mus, p.h_z, p.g_uev).unwrap();
        profiles.push(curve.peaks.iter().map(|pk| pk.mu).collect());
    }
    assert!(nz_class[0] > 0.5, "first h_z not in the ordered window: {nz_class:?}");
    assert!(nz_class[1] < 0.1 && nz_class[2] < 0.1, "classes: {nz_class:?}");
    let kt10 = donorsim_core::K_B_MEV_PER_K * 1e-3 * 10.0;
    let step10 = 30.0 * kt10 / 200.0;
    let differs = |a: &Vec<f64>, b: &Vec<f64>| -> bool {
        a.len() != b.len()
            || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 3.0 * step10)
    };
    assert!(
        differs(&profiles[0], &profiles[1]) && differs(&profiles[0], &profiles[2]),
        "in-window profile does not differ: {profiles:?}"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.1}s exceeds 5 min");
    println!(
        "[criterion 10] PASS: peaks T_r-independent, mean widths {widths:?} grow, in-window profile differs (runtime {elapsed:.1}s)"
    );
}

#[test]
fn criterion_11_charge_profile() {
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Square, 2, 2, A_NM, Boundary::Open).unwrap();
    let mut base = base_params();
    base.v0 = 0.6 * A_NM * base.t;
    let scale = base.t / base.spin_s();
    base.h_x = 0.01 * scale;
    let beta = Beta::Finite(beta_from_mk(10.0));
    let mu = 0.91 * base.t;
    let n_side = 10usize;
    let mut gh = Vec::new();
    for ig in 0..n_side {
        let gs = 0.05 + 0.95 * ig as f64 / (n_side - 1) as f64;
        for ih in 0..n_side {
            let hz = -0.02 - 0.78 * ih as f64 / (n_side - 1) as f64;
            gh.push((gs * scale * 1e3, hz * scale));
        }
    }
    let rows =
        total_charge_profile(&graph, &base, beta, &[mu], &gh, &EdConfig::default()).unwrap();
    // ⟨n⟩ sits on integer plateaus
    let plateaued = rows
        .iter()
        .filter(|r| (r.total_n - r.total_n.round()).abs() < 0.05)
        .count();
    assert!(
        plateaued * 100 >= rows.len() * 95,
        "only {plateaued}/{} points plateaued",
        rows.len()
    );
    // classify and demand a plateau boundary between the phases
    let class: Vec<i8> = rows
        .iter()
        .map(|r| {
            if r.n_z.abs() > 0.5 {
                1
            } else if r.n_z.abs() < 0.1 {
                0
            } else {
                -1
            }
        })
        .collect();
    assert!(class.iter().any(|&c| c == 1), "no ordered points");
    assert!(class.iter().any(|&c| c == 0), "no trivial points");
    let mut boundary_pairs = 0;
    for ig in 0..n_side {
        for ih in 0..n_side {
            let k = ig * n_side + ih;
            for kn in [(ig + 1) * n_side + ih, k + 1] {
                if kn >= rows.len() || (kn == k + 1 && ih + 1 >= n_side) {
                    continue;
                }
                if class[k] >= 0
                    && class[kn] >= 0
                    && class[k] != class[kn]
                    && rows[k].total_n.round() != rows[kn].total_n.round()
                {
                    boundary_pairs += 1;
                }
            }
        }
    }
    assert!(
        boundary_pairs > 0,
        "no plateau boundary separates the phases"
    );
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 11] PASS: {plateaued}/{} points plateaued, {boundary_pairs} ordered/trivial neighbors across a plateau boundary (runtime {elapsed:.1}s)",
        rows.len()
    );
}

#[test]
fn criterion_12_meanfield_invariant_suite() {
    // criteria 2-6 already run every converged state through
    // check_meanfield_invariants; this re-asserts the bundle on two
    // representative states so the suite reports the criterion directly
    let t0 = Instant::now();
    let graph = build_lattice::<f64>(Geometry::Chain, 43, 1, A_NM, Boundary::Periodic).unwrap();
    let mut p = base_params().with_coupling_ratio(0.5).with_field_ratios(-0.25, 0.01);
    p.v0 = 1.1 * A_NM * p.t;
    p.extra_electrons = 1;
    let coulomb = coulomb_matrix(&graph, p.v0, p.lambda).unwrap();
    let cfg = solver_cfg();
    let state = solve(&graph, &coulomb, &p, None, SolverKind::HartreeFockT0, &cfg).unwrap();
    assert!(state.converged);
    check_meanfield_invariants(&state, &graph, &coulomb, &p, None, SolverKind::HartreeFockT0, &cfg);

    let square = build_lattice::<f64>(Geometry::Square, 4, 4, A_NM, Boundary::Periodic).unwrap();
    let mut pf = base_params().with_coupling_ratio(0.5).with_field_ratios(-0.25, 0.01);
    pf.v0 = 1.1 * A_NM * pf.t;
    pf.beta = Beta::Finite(1e3);
    pf.mu = {
        let c = coulomb_matrix(&square, pf.v0, pf.lambda).unwrap();
        0.5 * (0..16).map(|j| c.v[(0, j)]).sum::<f64>()
    };
    let cf = coulomb_matrix(&square, pf.v0, pf.lambda).unwrap();
    let sf = solve(&square, &cf, &pf, None, SolverKind::Fthfb, &cfg).unwrap();
    assert!(sf.converged);
    check_meanfield_invariants(&sf, &square, &cf, &pf, None, SolverKind::Fthfb, &cfg);
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "[criterion 12] PASS: ρ spectrum, Bogoliubov identities, Ω monotonicity, and idempotence verified on HF and FTHFB states (runtime {elapsed:.1}s)"
    );
}
