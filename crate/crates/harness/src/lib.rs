//! Experiment driver for the phase-field solver: configuration, single runs,
//! `(ε, α)` sweeps on a worker pool, the solver-free pressure-jump pipeline
//! and CSV/JSON emission with a checksummed manifest.

pub mod config;
pub mod emit;
pub mod error;
pub mod jumps;
pub mod run;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, Format};
pub use error::{HarnessError, Result};

use emit::{emit, Emission, Manifest};

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| HarnessError::Io(e.to_string()))
}

/// `simulate`: one run at `(params.eps, params.alpha)`.
pub fn cmd_simulate(cfg: &ExperimentConfig, dir: &Path) -> Result<Manifest> {
    let started = Instant::now();
    let report = run::run_single(cfg, cfg.params.eps, cfg.params.alpha)?;
    let outcomes = [run::RunOutcome::Ok(report)];
    let table = run::sweep_table(cfg, &outcomes);
    emit(
        cfg,
        &Emission {
            command: "simulate",
            table_stem: "run",
            table: &table,
            summary: Some(to_value(&outcomes[0])?),
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
        dir,
    )
}

/// `sweep`: every `(ε, α)` pair. Outputs are written even when some runs
/// fail; the failure count is returned alongside the manifest.
pub fn cmd_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<(Manifest, usize)> {
    let started = Instant::now();
    let res = run::run_sweep(cfg)?;
    let table = run::sweep_table(cfg, &res.outcomes);
    let m = emit(
        cfg,
        &Emission {
            command: "sweep",
            table_stem: "sweep",
            table: &table,
            summary: Some(to_value(&res)?),
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
        dir,
    )?;
    Ok((m, res.failures()))
}

pub fn cmd_validate_transport(cfg: &ExperimentConfig, dir: &Path) -> Result<(Manifest, run::TransportCheck)> {
    let started = Instant::now();
    let check = run::validate_transport(cfg)?;
    let m = emit(
        cfg,
        &Emission {
            command: "validate-transport",
            table_stem: "transport",
            table: &run::transport_table(&check),
            summary: Some(to_value(&check)?),
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
        dir,
    )?;
    Ok((m, check))
}

pub fn cmd_jump_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<(Manifest, jumps::JumpSweep)> {
    let started = Instant::now();
    let js = jumps::jump_sweep(cfg)?;
    let table = jumps::jump_table(cfg, &js)?;
    let m = emit(
        cfg,
        &Emission {
            command: "jump-sweep",
            table_stem: "jumps",
            table: &table,
            summary: Some(to_value(&js)?),
            wall_clock_s: started.elapsed().as_secs_f64(),
        },
        dir,
    )?;
    Ok((m, js))
}

pub fn cmd_report(manifest_dir: &Path, format: Format, out: &Path) -> Result<PathBuf> {
    emit::report(manifest_dir, format, out)
}
