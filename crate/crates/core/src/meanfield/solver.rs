//! Self-consistent field loop with restarts, Ω-monotone step acceptance,
//! and chemical-potential tuning.

use crate::error::{Error, Result};
use crate::lattice::{hopping_matrix, CoulombMatrix, LatticeGraph};
use crate::linalg::sorted_symmetric_eigen;
use crate::meanfield::{
    bogoliubov_step, mean_fields, occupation_entropy_term, spin_update,
    InitStyle, MeanFieldState, SolverConfig, SolverKind,
};
use crate::model::{site_potentials, Beta, ModelParams, PinningPattern, SitePotentials};
use crate::scalar::Scalar;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Context<'a, T: Scalar> {
    graph: &'a LatticeGraph<T>,
    coulomb: &'a CoulombMatrix<T>,
    p: &'a ModelParams<T>,
    pots: SitePotentials<T>,
    hop: DMatrix<T>,
    kind: SolverKind,
    n_electrons: usize,
    include_fock: bool,
    include_pairing: bool,
}

impl<'a, T: Scalar> Context<'a, T> {
    fn beta(&self) -> Beta<T> {
        match self.kind {
            SolverKind::HartreeFockT0 => Beta::Infinite,
            SolverKind::Fthfb => self.p.beta,
        }
    }
}

#[derive(Clone)]
struct Iterate<T: Scalar> {
    rho: DMatrix<T>,
    pairing: DMatrix<T>,
    spins: Vec<[T; 3]>,
}

struct Proposal<T: Scalar> {
    iter: Iterate<T>,
    u: DMatrix<T>,
    v: DMatrix<T>,
    energies: Vec<T>,
    omega: T,
    energy: T,
    total_n: T,
    zero_mode: bool,
    spin_zero: bool,
}

/// One application of the self-consistency map
/// mean fields → Bogoliubov/occupation step → spin update.
fn propose<T: Scalar>(ctx: &Context<T>, x: &Iterate<T>) -> Proposal<T> {
    let n = ctx.graph.n_sites();
    let g = ctx.p.g_mev();
    let (gamma, delta) = mean_fields(
        &x.rho,
        &x.pairing,
        ctx.coulomb,
        ctx.include_fock,
        ctx.include_pairing && ctx.kind == SolverKind::Fthfb,
    );
    let mut h_sp = &ctx.hop + gamma;
    for i in 0..n {
        h_sp[(i, i)] += -ctx.pots.mu[i] - g * x.spins[i][2];
    }

    let (rho_new, k_new, u, v, energies, occupations, zero_mode) = match ctx.kind {
        SolverKind::Fthfb => {
            // with a dead pairing channel the BdG problem block-diagonalizes;
            // the N×N path is 8x cheaper than the 2N×2N one. Pairing fields
            // below a nano-meV are indistinguishable from eigensolver noise.
            let delta_dead = delta.iter().all(|x| x.abs() < T::from_f(1e-9));
            if delta_dead {
                let (evals, evecs) = crate::linalg::sorted_symmetric_eigen(&h_sp);
                let occ: Vec<T> =
                    evals.iter().map(|&e| crate::meanfield::fermi_occupation(ctx.beta(), e)).collect();
                let f = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(occ.clone()));
                let rho = &evecs * f * evecs.transpose();
                let scale = evals
                    .iter()
                    .fold(T::one(), |m, e| m.max(e.abs()));
                let zero = evals.iter().any(|e| e.abs() < T::from_f(1e-10) * scale);
                (
                    rho,
                    DMatrix::zeros(n, n),
                    evecs.transpose(),
                    DMatrix::zeros(n, n),
                    evals,
                    occ,
                    zero,
                )
            } else {
                let step = bogoliubov_step(&h_sp, &delta, ctx.beta());
                (
                    step.rho,
                    step.pairing,
                    step.u,
                    step.v,
                    step.energies,
                    step.occupations,
                    step.zero_mode,
                )
            }
        }
        SolverKind::HartreeFockT0 => {
            let (rho, u, energies, zero) = occupy_lowest(&h_sp, ctx.n_electrons, &x.rho);
            let occ: Vec<T> = (0..n)
                .map(|k| if k < ctx.n_electrons { T::one() } else { T::zero() })
                .collect();
            (rho, DMatrix::zeros(n, n), u, DMatrix::zeros(n, n), energies, occ, zero)
        }
    };

    let (spins_new, spin_zero) =
        spin_update(&rho_diag(&rho_new), &x.spins, ctx.p, &ctx.pots.epsilon, ctx.beta());

    let (omega, energy, total_n) =
        functional(ctx, &rho_new, &k_new, &spins_new, &occupations);
    Proposal {
        iter: Iterate { rho: rho_new, pairing: k_new, spins: spins_new },
        u,
        v,
        energies,
        omega,
        energy,
        total_n,
        zero_mode,
        spin_zero,
    }
}

fn rho_diag<T: Scalar>(rho: &DMatrix<T>) -> Vec<T> {
    (0..rho.nrows()).map(|i| rho[(i, i)]).collect()
}

/// T = 0 occupation of the lowest `n_e` orbitals. A degenerate group at the
/// Fermi edge is resolved by maximizing overlap with the previous density
/// matrix (deterministic at level crossings).
fn occupy_lowest<T: Scalar>(
    h_sp: &DMatrix<T>,
    n_e: usize,
    prev_rho: &DMatrix<T>,
) -> (DMatrix<T>, DMatrix<T>, Vec<T>, bool) {
    let n = h_sp.nrows();
    let (evals, evecs) = sorted_symmetric_eigen(h_sp);
    let mut rho = DMatrix::<T>::zeros(n, n);
    let mut degenerate_edge = false;
    if n_e == 0 {
        return (rho, evecs.transpose(), evals, false);
    }
    if n_e >= n {
        let rho = DMatrix::identity(n, n);
        return (rho, evecs.transpose(), evals, false);
    }
    let scale = evals[n - 1].abs().max(evals[0].abs()).max(T::one());
    let tol = T::from_f(1e-9) * scale;
    // degenerate group straddling the Fermi edge
    let e_fermi = evals[n_e - 1];
    if evals[n_e] - e_fermi < tol {
        degenerate_edge = true;
        let mut k0 = n_e - 1;
        while k0 > 0 && e_fermi - evals[k0 - 1] < tol {
            k0 -= 1;
        }
        let mut k1 = n_e;
        while k1 < n && evals[k1] - e_fermi < tol {
            k1 += 1;
        }
        // fully occupied below the group
        for k in 0..k0 {
            let col = evecs.column(k);
            rho += col * col.transpose();
        }
        // inside the group: occupy the directions with the largest overlap
        // with the previous iterate
        let m = k1 - k0;
        let need = n_e - k0;
        let q = evecs.columns(k0, m).into_owned();
        let proj = q.transpose() * prev_rho * &q;
        let sym = (proj.clone() + proj.transpose()) * T::from_f(0.5);
        let (pvals, pvecs) = sorted_symmetric_eigen(&sym);
        let _ = pvals;
        // eigenvalues ascending: take the last `need` columns
        for k in 0..need {
            let w = pvecs.column(m - 1 - k);
            let orbital = &q * w;
            rho += &orbital * orbital.transpose();
        }
    } else {
        for k in 0..n_e {
            let col = evecs.column(k);
            rho += col * col.transpose();
        }
    }
    (rho, evecs.transpose(), evals, degenerate_edge)
}

/// Mean-field energy, grand potential, and particle number of a state.
fn functional<T: Scalar>(
    ctx: &Context<T>,
    rho: &DMatrix<T>,
    pairing: &DMatrix<T>,
    spins: &[[T; 3]],
    occupations: &[T],
) -> (T, T, T) {
    let n = rho.nrows();
    let g = ctx.p.g_mev();
    let mut e = T::zero();
    for i in 0..n {
        for j in 0..n {
            e += ctx.hop[(i, j)] * rho[(i, j)];
        }
    }
    for i in 0..n {
        e -= g * spins[i][2] * rho[(i, i)];
        e -= ctx.p.h_x * spins[i][0] + (ctx.p.h_z + ctx.pots.epsilon[i]) * spins[i][2];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = ctx.coulomb.v[(i, j)];
            if v == T::zero() {
                continue;
            }
            let mut pair = rho[(i, i)] * rho[(j, j)];
            if ctx.include_fock {
                pair -= rho[(i, j)] * rho[(j, i)];
            }
            if ctx.include_pairing {
                pair += pairing[(i, j)] * pairing[(i, j)];
            }
            e += v * pair;
        }
    }
    let mut total_n = T::zero();
    let mut grand = e;
    for i in 0..n {
        total_n += rho[(i, i)];
        grand -= ctx.pots.mu[i] * rho[(i, i)];
    }
    let omega = match ctx.beta() {
        Beta::Infinite => grand,
        Beta::Finite(b) => {
            let s: T = occupations
                .iter()
                .fold(T::zero(), |acc, &f| acc + occupation_entropy_term(f));
            grand + s / b
        }
    };
    (omega, e, total_n)
}

fn residual<T: Scalar>(x: &Iterate<T>, prop: &Proposal<T>) -> T {
    let mut r = crate::linalg::max_abs_diff(&x.rho, &prop.iter.rho);
    r = r.max(crate::linalg::max_abs_diff(&x.pairing, &prop.iter.pairing));
    for (a, b) in x.spins.iter().zip(&prop.iter.spins) {
        for c in 0..3 {
            r = r.max((a[c] - b[c]).abs());
        }
    }
    r
}

fn mix<T: Scalar>(x: &Iterate<T>, prop: &Iterate<T>, alpha: T) -> Iterate<T> {
    let one_m = T::one() - alpha;
    let rho = &x.rho * one_m + &prop.rho * alpha;
    let pairing = &x.pairing * one_m + &prop.pairing * alpha;
    let spins = x
        .spins
        .iter()
        .zip(&prop.spins)
        .map(|(a, b)| {
            [
                one_m * a[0] + alpha * b[0],
                one_m * a[1] + alpha * b[1],
                one_m * a[2] + alpha * b[2],
            ]
        })
        .collect();
    Iterate { rho, pairing, spins }
}

fn initial_iterate<T: Scalar>(
    ctx: &Context<T>,
    style: InitStyle,
    seed: u64,
) -> Result<Iterate<T>> {
    let n = ctx.graph.n_sites();
    let s = ctx.p.spin_s();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spins: Vec<[T; 3]> = match style {
        InitStyle::Uniform => (0..n).map(|_| [T::zero(), T::zero(), s]).collect(),
        InitStyle::Staggered => (0..n)
            .map(|i| {
                let delta: T = ctx.graph.sublattice[i].parity();
                let sz = delta * s * T::from_f(0.9);
                let sx = s * T::from_f(0.05 * rng.gen_range(-1.0..1.0));
                let norm = (sx * sx + sz * sz).sqrt();
                let scale = if norm > s { s / norm } else { T::one() };
                [sx * scale, T::zero(), sz * scale]
            })
            .collect(),
        InitStyle::Random => (0..n)
            .map(|_| {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                [s * T::from_f(theta.sin()), T::zero(), s * T::from_f(theta.cos())]
            })
            .collect(),
        InitStyle::Pinned => {
            if ctx.pots.epsilon.iter().all(|&e| e == T::zero()) {
                return Err(Error::Solver(
                    "pinned initial guess requires a pinning pattern".into(),
                ));
            }
            ctx.pots
                .epsilon
                .iter()
                .map(|&e| {
                    let sign = if e >= T::zero() { T::one() } else { -T::one() };
                    [T::zero(), T::zero(), sign * s]
                })
                .collect()
        }
    };
    let nu = match ctx.kind {
        SolverKind::HartreeFockT0 => T::from_f(ctx.n_electrons as f64 / n as f64),
        SolverKind::Fthfb => ctx.p.filling,
    };
    let rho = DMatrix::from_diagonal_element(n, n, nu);
    let mut pairing = DMatrix::<T>::zeros(n, n);
    if ctx.include_pairing && ctx.kind == SolverKind::Fthfb {
        // seed the anomalous channel so that its decay to zero is dynamical,
        // not built in
        for &(i, j) in &ctx.graph.neighbor_pairs {
            let amp = T::from_f(1e-3 * rng.gen_range(0.2..1.0));
            pairing[(i, j)] += amp;
            pairing[(j, i)] -= amp;
        }
    }
    Ok(Iterate { rho, pairing, spins })
}

fn run_single<T: Scalar>(
    ctx: &Context<T>,
    init: Iterate<T>,
    cfg: &SolverConfig<T>,
) -> MeanFieldState<T> {
    let mut alpha = cfg.mixing;
    let mut x = init;
    let mut prop = propose(ctx, &x);
    let mut trace = vec![prop.omega];
    let mut zero_any = prop.zero_mode;
    let mut spin_zero_any = prop.spin_zero;
    let mut converged = false;
    let mut monotonicity_broken = false;
    let mut iterations = 1;
    let mut good_streak = 0usize;

    for iter in 2..=cfg.max_iterations {
        iterations = iter;
        if residual(&x, &prop) < cfg.tolerance {
            converged = true;
            iterations = iter - 1;
            break;
        }
        let slack = T::from_f(1e-9).max(T::machine_epsilon() * T::from_f(64.0))
            * (T::one() + prop.omega.abs());
        let enforce = trace.len() >= 5;
        let mut a = alpha;
        let mut chosen: Option<(Iterate<T>, Proposal<T>, bool)> = None;
        for retry in 0..=24 {
            let cand = mix(&x, &prop.iter, a);
            let cprop = propose(ctx, &cand);
            let ok = !enforce || cprop.omega <= prop.omega + slack;
            if ok || retry == 24 {
                chosen = Some((cand, cprop, !ok));
                break;
            }
            a *= T::from_f(0.5);
        }
        let (cand, cprop, violated) = chosen.expect("acceptance loop always yields");
        if violated {
            monotonicity_broken = true;
        }
        if a < alpha {
            alpha = a;
            good_streak = 0;
        } else {
            // recover the mixing slowly after a run of clean steps
            good_streak += 1;
            if good_streak >= 10 && alpha < cfg.mixing {
                alpha = (alpha * T::from_f(1.5)).min(cfg.mixing);
                good_streak = 0;
            }
        }
        x = cand;
        prop = cprop;
        zero_any |= prop.zero_mode;
        spin_zero_any |= prop.spin_zero;
        trace.push(prop.omega);
    }

    MeanFieldState {
        rho: prop.iter.rho,
        pairing: prop.iter.pairing,
        spins: prop.iter.spins,
        u: prop.u,
        v: prop.v,
        quasiparticle_energies: prop.energies,
        omega: prop.omega,
        energy: prop.energy,
        total_n: prop.total_n,
        iterations,
        converged: converged && !monotonicity_broken,
        omega_trace: trace,
        zero_mode_flagged: zero_any,
        spin_field_zero_flagged: spin_zero_any,
    }
}

fn make_context<'a, T: Scalar>(
    graph: &'a LatticeGraph<T>,
    coulomb: &'a CoulombMatrix<T>,
    p: &'a ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    kind: SolverKind,
    cfg: &SolverConfig<T>,
) -> Result<Context<'a, T>> {
    p.validate()?;
    if cfg.tolerance <= T::zero() {
        return Err(Error::Solver("tolerance must be positive".into()));
    }
    if cfg.restarts == 0 {
        return Err(Error::Solver("need at least one restart".into()));
    }
    if cfg.mixing <= T::zero() || cfg.mixing > T::one() {
        return Err(Error::Solver("mixing must lie in (0, 1]".into()));
    }
    if coulomb.n_sites() != graph.n_sites() {
        return Err(Error::Solver("Coulomb matrix size mismatch".into()));
    }
    let pots = site_potentials(p, graph, pinning)?;
    Ok(Context {
        graph,
        coulomb,
        p,
        pots,
        hop: hopping_matrix(graph, p.t),
        kind,
        n_electrons: p.electron_count(graph.n_sites()),
        include_fock: cfg.include_fock,
        include_pairing: cfg.include_pairing,
    })
}

/// Solve the self-consistent mean-field problem. Runs the restart ladder
/// (pinned seed first when pinning is present, then staggered, uniform, and
/// seeded random guesses) and returns the lowest-Ω converged state; if no
/// restart converges, the lowest-Ω attempt is returned with
/// `converged = false`. Non-convergence is reported, never thrown.
pub fn solve<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    kind: SolverKind,
    cfg: &SolverConfig<T>,
) -> Result<MeanFieldState<T>> {
    solve_with_start(graph, coulomb, p, pinning, kind, cfg, None)
}

/// [`solve`] with an optional warm start; the warm state replaces the
/// restart ladder (falling back to it only if the warm run fails to
/// converge).
pub fn solve_with_start<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    kind: SolverKind,
    cfg: &SolverConfig<T>,
    warm: Option<&MeanFieldState<T>>,
) -> Result<MeanFieldState<T>> {
    let ctx = make_context(graph, coulomb, p, pinning, kind, cfg)?;

    if let Some(w) = warm {
        if w.n_sites() != graph.n_sites() {
            return Err(Error::Solver("warm-start size mismatch".into()));
        }
        let init = Iterate {
            rho: w.rho.clone(),
            pairing: w.pairing.clone(),
            spins: w.spins.clone(),
        };
        let state = run_single(&ctx, init, cfg);
        if state.converged {
            return Ok(state);
        }
    }

    let styles: Vec<InitStyle> = match cfg.init {
        Some(style) => vec![style],
        None => {
            let mut v = Vec::new();
            if pinning.is_some() {
                v.push(InitStyle::Pinned);
            }
            v.push(InitStyle::Staggered);
            if cfg.restarts >= 2 {
                v.push(InitStyle::Uniform);
            }
            for _ in 2..cfg.restarts {
                v.push(InitStyle::Random);
            }
            v
        }
    };

    let mut best: Option<MeanFieldState<T>> = None;
    let mut best_any: Option<MeanFieldState<T>> = None;
    for (k, &style) in styles.iter().enumerate() {
        let init = initial_iterate(&ctx, style, cfg.seed.wrapping_add(k as u64))?;
        let state = run_single(&ctx, init, cfg);
        if state.converged && best.as_ref().map_or(true, |b| state.omega < b.omega) {
            best = Some(state.clone());
        }
        if best_any.as_ref().map_or(true, |b| state.omega < b.omega) {
            best_any = Some(state);
        }
    }
    Ok(best.or(best_any).expect("at least one restart ran"))
}

/// One application of the iteration map (propose + mixing) from a given
/// state; used for fixed-point idempotence checks.
pub fn one_iteration<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    pinning: Option<&PinningPattern<T>>,
    kind: SolverKind,
    cfg: &SolverConfig<T>,
    state: &MeanFieldState<T>,
) -> Result<MeanFieldState<T>> {
    let ctx = make_context(graph, coulomb, p, pinning, kind, cfg)?;
    let x = Iterate {
        rho: state.rho.clone(),
        pairing: state.pairing.clone(),
        spins: state.spins.clone(),
    };
    let prop = propose(&ctx, &x);
    let res = residual(&x, &prop);
    let mixed = mix(&x, &prop.iter, cfg.mixing);
    let mut out = state.clone();
    out.rho = mixed.rho;
    out.pairing = mixed.pairing;
    out.spins = mixed.spins;
    out.u = prop.u;
    out.v = prop.v;
    out.quasiparticle_energies = prop.energies;
    out.omega = prop.omega;
    out.energy = prop.energy;
    out.total_n = prop.total_n;
    out.converged = res < cfg.tolerance;
    Ok(out)
}

/// Bisection on μ ↦ Tr ρ(μ) for the FTHFB solver until the target electron
/// number is matched within 0.5; when the target sits on a charge plateau
/// the plateau midpoint is returned. Monotonicity of the sampled points is
/// verified.
pub fn tune_chemical_potential<T: Scalar>(
    graph: &LatticeGraph<T>,
    coulomb: &CoulombMatrix<T>,
    p: &ModelParams<T>,
    cfg: &SolverConfig<T>,
    target_n: T,
) -> Result<(T, MeanFieldState<T>)> {
    let n = graph.n_sites();
    if target_n <= T::zero() || target_n >= T::from_f(n as f64) {
        return Err(Error::Solver(format!(
            "target electron number must lie in (0, {n})"
        )));
    }
    let mut samples: Vec<(T, T)> = Vec::new();
    let mut warm: Option<MeanFieldState<T>> = None;
    // bisection decisions only need Tr ρ to ~1e-3, so the sampling solves
    // run with a capped budget; the final μ gets the caller's full config
    let sample_cfg = SolverConfig {
        restarts: cfg.restarts.min(2),
        max_iterations: cfg.max_iterations.min(800),
        tolerance: cfg.tolerance.max(T::from_f(1e-8)),
        ..cfg.clone()
    };
    let solve_at = |mu: T,
                    warm: &mut Option<MeanFieldState<T>>,
                    samples: &mut Vec<(T, T)>|
     -> Result<MeanFieldState<T>> {
        let mut pm = p.clone();
        pm.mu = mu;
        pm.mu_site = None;
        let state = solve_with_start(
            graph,
            coulomb,
            &pm,
            None,
            SolverKind::Fthfb,
            &sample_cfg,
            warm.as_ref(),
        )?;
        samples.push((mu, state.total_n));
        *warm = Some(state.clone());
        Ok(state)
    };

    // bracket the target around the Hartree-shifted band center: at filling
    // ν the uniform Hartree shift is ν·Σ_j V_ij, and the free band plus
    // hyperfine span at most ~4t + gS around it
    let nu = target_n / T::from_f(n as f64);
    let hartree_scale = (0..n)
        .map(|i| (0..n).map(|j| coulomb.v[(i, j)].to_f()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let center = nu * T::from_f(hartree_scale);
    let mut span =
        T::from_f(5.0) * p.t + p.g_mev() * p.spin_s() + p.h_z.abs() + T::one();
    let mut lo = center - span;
    let mut hi = center + span;
    let mut n_lo = solve_at(lo, &mut warm, &mut samples)?.total_n;
    let mut n_hi = solve_at(hi, &mut warm, &mut samples)?.total_n;
    let mut expansions = 0;
    while (n_lo > target_n || n_hi < target_n) && expansions < 8 {
        span *= T::from_f(2.0);
        lo = center - span;
        hi = center + span;
        n_lo = solve_at(lo, &mut warm, &mut samples)?.total_n;
        n_hi = solve_at(hi, &mut warm, &mut samples)?.total_n;
        expansions += 1;
    }
    if n_lo > target_n || n_hi < target_n {
        return Err(Error::Solver(format!(
            "bracket failure: n({:.3}) = {:.3}, n({:.3}) = {:.3}, target {:.3}; curve: {:?}",
            lo.to_f(),
            n_lo.to_f(),
            hi.to_f(),
            n_hi.to_f(),
            target_n.to_f(),
            samples.iter().map(|(m, v)| (m.to_f(), v.to_f())).collect::<Vec<_>>()
        )));
    }

    let half = T::from_f(0.5);
    let mut found: Option<(T, MeanFieldState<T>)> = None;
    let mut mid = (lo + hi) * half;
    for _ in 0..28 {
        mid = (lo + hi) * half;
        let state = solve_at(mid, &mut warm, &mut samples)?;
        let nn = state.total_n;
        if (nn - target_n).abs() < half {
            found = Some((mid, state));
            break;
        }
        if nn < target_n {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() < T::from_f(1e-12) * span.abs().max(T::one()) {
            break;
        }
    }

    // verify monotonicity of the sampled curve
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let slack = T::from_f(1e-4 * n as f64);
    for w in sorted.windows(2) {
        if w[1].1 < w[0].1 - slack {
            return Err(Error::Solver(format!(
                "Tr ρ(μ) not monotone on sampled points: {:?}",
                sorted.iter().map(|(m, v)| (m.to_f(), v.to_f())).collect::<Vec<_>>()
            )));
        }
    }

    let Some((mu_star, state_star)) = found else {
        // the target sits exactly between plateaus: return the jump location
        let state = solve_at(mid, &mut warm, &mut samples)?;
        return Ok((mid, state));
    };

    // plateau refinement: locate where |n - target| < 1/2 stops holding
    let inside = |nn: T| (nn - target_n).abs() < half;
    let mut edge = |mut outside: T, mut within: T| -> Result<T> {
        for _ in 0..12 {
            let m = (outside + within) * half;
            let st = solve_at(m, &mut warm, &mut samples)?;
            if inside(st.total_n) {
                within = m;
            } else {
                outside = m;
            }
        }
        Ok((outside + within) * half)
    };
    let left = edge(center - span, mu_star)?;
    let right = edge(center + span, mu_star)?;
    let mu_final = (left + right) * half;
    // final full-rigor solve: the mid-plateau warm start competes with the
    // fresh restart ladder, lowest Ω wins (plateau-edge samples can leave
    // partially ordered states behind)
    let mut pm = p.clone();
    pm.mu = mu_final;
    pm.mu_site = None;
    let warm_run = solve_with_start(
        graph,
        coulomb,
        &pm,
        None,
        SolverKind::Fthfb,
        cfg,
        Some(&state_star),
    )?;
    let ladder_run = solve(graph, coulomb, &pm, None, SolverKind::Fthfb, cfg)?;
    let state = match (warm_run.converged, ladder_run.converged) {
        (true, false) => warm_run,
        (false, true) => ladder_run,
        _ => {
            if warm_run.omega <= ladder_run.omega {
                warm_run
            } else {
                ladder_run
            }
        }
    };
    Ok((mu_final, state))
}
