//! Command-line front end: config loading, dispatch, and run manifests.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver non-convergence
//! in strict mode.

pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser, Debug)]
#[command(name = "donorsim", about = "Dopant-lattice fermion-spin simulation toolkit")]
pub struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for grid sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Base random seed for solver restarts.
    #[arg(long, global = true, default_value_t = 1234)]
    pub seed: u64,
    /// Exit with code 2 when any solver fails to converge.
    #[arg(long, global = true, default_value_t = false)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Report the dimensionless coupling ratios gS/t, h_zS/t, h_xS/t.
    Regime,
    /// Sweep |n_z| over a (gS/t, h_zS/t) grid.
    PhaseDiagram,
    /// Static potential V(d) between pinned domain walls on a chain.
    Confinement,
    /// Grand-canonical charge occupation landscape from ED.
    ChargeProfile,
    /// Linear-conductance curves versus chemical potential.
    Conductance,
    /// Tight-binding band tables and continuum checks.
    Bands,
    /// Correlator profile with oscillatory/exponential decay fits.
    Correlators,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Regime => "regime",
            Command::PhaseDiagram => "phase-diagram",
            Command::Confinement => "confinement",
            Command::ChargeProfile => "charge-profile",
            Command::Conductance => "conductance",
            Command::Bands => "bands",
            Command::Correlators => "correlators",
        }
    }
}

/// Run a parsed invocation; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = match config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(1);
        }
    };
    if cli.workers > 0 {
        // a process-global pool; later invocations in the same process keep
        // the first size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    let started = SystemTime::now().duration_since(UNIX_EPOCH).unwrap().as_secs();
    let clock = Instant::now();
    let outcome = match cli.command {
        Command::Regime => commands::regime(&cfg, &cli.out, cli.seed),
        Command::PhaseDiagram => commands::phase_diagram(&cfg, &cli.out, cli.seed),
        Command::Confinement => commands::confinement(&cfg, &cli.out, cli.seed),
        Command::ChargeProfile => commands::charge_profile(&cfg, &cli.out, cli.seed),
        Command::Conductance => commands::conductance(&cfg, &cli.out, cli.seed),
        Command::Bands => commands::bands(&cfg, &cli.out, cli.seed),
        Command::Correlators => commands::correlators(&cfg, &cli.out, cli.seed),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return Ok(1);
        }
    };
    let manifest = output::Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        workers: cli.workers,
        strict: cli.strict,
        started_unix_s: started,
        wall_time_s: clock.elapsed().as_secs_f64(),
        outputs: outcome
            .outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
        config: &cfg,
    };
    output::write_manifest(&cli.out, &manifest)?;
    if cli.strict && !outcome.all_converged {
        eprintln!("strict mode: at least one solver did not converge");
        return Ok(2);
    }
    Ok(0)
}
