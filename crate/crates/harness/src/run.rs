//! Single solver runs and `(ε, α)` sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use phasefield_core::analytic::{interface_state, transport_solution, young_laplace_jump};
use phasefield_core::diagnostics::{bump, deviation, discrepancy_positive_part, scaling_fit, DiagnosticsRecord, ScalingFit};
use phasefield_core::pressure::{jump, jump_extrapolate_by, Extrapolation, JumpMeasurement, PressureDecomposition};
use phasefield_core::solver::{simulate_observed, SolverState};
use phasefield_core::{deriv_r, integrate, make_grid, Field, MobilityExponent, Profile};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

pub const SWEEP_COLUMNS: [&str; 18] = [
    "eps",
    "alpha",
    "t_probe",
    "R_analytic",
    "R_measured",
    "jump_total",
    "jump_p1",
    "jump_p2",
    "jump_p3",
    "jump_young_laplace",
    "kappa_target",
    "energy",
    "discrepancy_pos",
    "bv_seminorm",
    "mass",
    "d_eps_l2",
    "d_eps_h1w",
    "status",
];

/// Deviation from the zero-mobility solution at one probe time. The
/// integrals run over `[0, t]` with the trapezoidal rule on the step times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSample {
    pub t: f64,
    pub l2: f64,
    pub h1w: f64,
    pub h1w_time_integral: f64,
    pub discrepancy_pos_time_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub eps: f64,
    pub alpha: MobilityExponent,
    pub cells: usize,
    pub steps: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub jumps: Vec<JumpMeasurement>,
    pub deviations: Vec<DeviationSample>,
    pub young_laplace: Vec<f64>,
    pub kappa: Vec<f64>,
    pub radius_analytic: Vec<f64>,
    pub wall_clock_s: f64,
}

/// Outcome of one sweep cell; failures keep their stage and message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Ok(RunReport),
    Failed { eps: f64, alpha: MobilityExponent, error: String },
}

impl RunOutcome {
    pub fn report(&self) -> Option<&RunReport> {
        match self {
            RunOutcome::Ok(r) => Some(r),
            RunOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Default)]
struct Accumulator {
    last: Option<(f64, f64, f64)>,
    h1w: f64,
    xi: f64,
    steps: usize,
}

pub fn run_single(cfg: &ExperimentConfig, eps: f64, alpha: MobilityExponent) -> Result<RunReport> {
    let started = Instant::now();
    let params = cfg.params.with_eps(eps).with_alpha(alpha);
    let pot = cfg.potential;
    let prof = cfg.profile()?;
    let cells = cfg.cells_for(eps);
    let grid = make_grid(1.0, params.outer_radius, cells, params.n_dim).map_err(HarnessError::run("grid"))?;
    let init = SolverState::initial(&grid, params, pot, &prof).map_err(HarnessError::run("initial condition"))?;

    let oracle = |t: f64| grid.sample(|r| transport_solution(r, t, &params, &prof));
    let mut acc = Accumulator::default();
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    let states = simulate_observed(init, &prof, &cfg.stepping, cfg.t_end, &cfg.probe_times, |s| {
        let d = s.c.zip_with(&oracle(s.t), |a, b| a - b).expect("same grid");
        let h1w = eps * integrate(&deriv_r(&d).map(|x| x * x));
        let xi = discrepancy_positive_part(&s.c, &params, &pot);
        if let Some((t0, h0, x0)) = acc.last {
            let dt = s.t - t0;
            acc.h1w += 0.5 * dt * (h0 + h1w);
            acc.xi += 0.5 * dt * (x0 + xi);
            acc.steps += 1;
        }
        acc.last = Some((s.t, h1w, xi));
        samples.push((s.t, acc.h1w, acc.xi));
    })
    .map_err(HarnessError::run("simulate"))?;

    let mut report = RunReport {
        eps,
        alpha,
        cells,
        steps: acc.steps,
        records: Vec::new(),
        jumps: Vec::new(),
        deviations: Vec::new(),
        young_laplace: Vec::new(),
        kappa: Vec::new(),
        radius_analytic: Vec::new(),
        wall_clock_s: 0.0,
    };
    for s in &states {
        let ist = interface_state(s.t, &params);
        let phi = bump(ist.radius, cfg.jump.pairing_half_width);
        let tests: [(String, &dyn Fn(f64) -> f64); 1] = [("bump_R".to_string(), &phi)];
        report.records.push(DiagnosticsRecord::measure(s.t, &s.c, &params, &pot, &tests));
        let dec = PressureDecomposition::decompose(&s.c, &params);
        report
            .jumps
            .push(jump(&dec, s.t, ist.radius, cfg.jump.delta_probe).map_err(HarnessError::run("pressure jump"))?);
        let (l2, h1w) = deviation(&s.c, &oracle(s.t), &params).map_err(HarnessError::run("deviation"))?;
        // The observer saw this exact state last among those with time s.t.
        let &(_, hi, xi) = samples.iter().rev().find(|x| x.0 == s.t).expect("probe state was observed");
        report.deviations.push(DeviationSample {
            t: s.t,
            l2,
            h1w,
            h1w_time_integral: hi,
            discrepancy_pos_time_integral: xi,
        });
        report.young_laplace.push(young_laplace_jump(s.t, &params, prof.sigma_profile()));
        report.kappa.push(ist.kappa);
        report.radius_analytic.push(ist.radius);
    }
    report.wall_clock_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs `jobs` on `workers` threads and returns the results in job order.
pub fn run_pool<J: Sync, T: Send>(jobs: &[J], workers: usize, work: impl Fn(&J) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            let tx = tx.clone();
            let (next, work) = (&next, &work);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(k) else { break };
                if tx.send((k, work(job))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut out: Vec<(usize, T)> = rx.into_iter().collect();
    out.sort_by_key(|(k, _)| *k);
    out.into_iter().map(|(_, v)| v).collect()
}

/// Per-α results over the `ε` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub alpha: MobilityExponent,
    pub eps: Vec<f64>,
    /// Log-log fit of `∫₀^T ε‖∂_r d_ε‖² dt` against `ε`.
    pub deviation_fit: Option<ScalingFit>,
    /// Log-log fit of `∫₀^T ∫(ξ_ε)⁺ dt` against `ε`.
    pub discrepancy_fit: Option<ScalingFit>,
    pub jumps: Vec<ProbeExtrapolation>,
    /// Whether `α < 1/(n-1)`.
    pub strong_discrepancy_regime: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeExtrapolation {
    pub t_probe: f64,
    pub total: Extrapolation,
    pub p1: Extrapolation,
    pub young_laplace: f64,
    /// Inside-minus-outside extrapolated jump over the Young-Laplace value.
    pub ratio: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub outcomes: Vec<RunOutcome>,
    pub summaries: Vec<AlphaSummary>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.report().is_none()).count()
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let jobs: Vec<(f64, MobilityExponent)> = cfg
        .sweep
        .alpha
        .iter()
        .flat_map(|&a| cfg.sweep.eps.iter().map(move |&e| (e, a)))
        .collect();
    let outcomes = run_pool(&jobs, cfg.workers(), |&(eps, alpha)| match run_single(cfg, eps, alpha) {
        Ok(r) => RunOutcome::Ok(r),
        Err(e) => RunOutcome::Failed { eps, alpha, error: e.to_string() },
    });
    let summaries = cfg.sweep.alpha.iter().map(|&a| summarize(cfg, a, &outcomes)).collect();
    Ok(SweepResult { outcomes, summaries })
}

fn summarize(cfg: &ExperimentConfig, alpha: MobilityExponent, outcomes: &[RunOutcome]) -> AlphaSummary {
    let reports: Vec<&RunReport> = outcomes.iter().filter_map(|o| o.report()).filter(|r| r.alpha == alpha).collect();
    let mut notes = Vec::new();
    let fit = |f: &dyn Fn(&DeviationSample) -> f64, notes: &mut Vec<String>, what: &str| {
        let pairs: Vec<(f64, f64)> = reports.iter().filter_map(|r| r.deviations.last().map(|d| (r.eps, f(d)))).collect();
        match scaling_fit(&pairs) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("{what} fit skipped: {e}"));
                None
            }
        }
    };
    let deviation_fit = fit(&|d| d.h1w_time_integral, &mut notes, "deviation");
    let discrepancy_fit = fit(&|d| d.discrepancy_pos_time_integral, &mut notes, "discrepancy");
    let mut jumps = Vec::new();
    for (k, &t) in cfg.probe_times.iter().enumerate() {
        let series: Vec<JumpMeasurement> = reports.iter().filter_map(|r| r.jumps.get(k).copied()).collect();
        let total = jump_extrapolate_by(&series, |m| m.value);
        let p1 = jump_extrapolate_by(&series, |m| m.p1);
        match (total, p1) {
            (Ok(total), Ok(p1)) => {
                let r = reports[0];
                jumps.push(ProbeExtrapolation {
                    t_probe: t,
                    total,
                    p1,
                    young_laplace: r.young_laplace[k],
                    ratio: -total.value / r.young_laplace[k],
                    kappa: r.kappa[k],
                });
            }
            (Err(e), _) | (_, Err(e)) => notes.push(format!("jump extrapolation at t = {t} skipped: {e}")),
        }
    }
    let strong_discrepancy_regime = match alpha.finite() {
        Some(a) => a < 1.0 / f64::from(cfg.params.n_dim - 1),
        None => false,
    };
    AlphaSummary {
        alpha,
        eps: reports.iter().map(|r| r.eps).collect(),
        deviation_fit,
        discrepancy_fit,
        jumps,
        strong_discrepancy_regime,
        notes,
    }
}

/// One row per probe time of a run; failed runs yield rows with empty
/// numeric cells and the error in `status`.
pub fn sweep_table(cfg: &ExperimentConfig, outcomes: &[RunOutcome]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for o in outcomes {
        match o {
            RunOutcome::Ok(r) => {
                for k in 0..r.records.len() {
                    let (rec, j, d) = (&r.records[k], &r.jumps[k], &r.deviations[k]);
                    t.push(vec![
                        Cell::num(r.eps),
                        Cell::text(r.alpha.to_string()),
                        Cell::num(rec.t),
                        Cell::num(r.radius_analytic[k]),
                        rec.interface_radius.map_or(Cell::Num(None), Cell::num),
                        Cell::num(j.inside_minus_outside()),
                        Cell::num(-j.p1),
                        Cell::num(-j.p2),
                        Cell::num(-j.p3),
                        Cell::num(r.young_laplace[k]),
                        Cell::num(r.kappa[k]),
                        Cell::num(rec.energy),
                        Cell::num(rec.discrepancy_pos),
                        Cell::num(rec.bv_seminorm),
                        Cell::num(rec.mass),
                        Cell::num(d.l2),
                        Cell::num(d.h1w),
                        Cell::text("ok"),
                    ]);
                }
            }
            RunOutcome::Failed { eps, alpha, error } => {
                for &tp in &cfg.probe_times {
                    let mut row = vec![Cell::num(*eps), Cell::text(alpha.to_string()), Cell::num(tp)];
                    row.extend((3..SWEEP_COLUMNS.len() - 1).map(|_| Cell::Num(None)));
                    row.push(Cell::text(format!("failed: {error}")));
                    t.push(row);
                }
            }
        }
    }
    t
}

/// Zero-mobility comparison at `t_end` on the configured grid and on the
/// grid with half the spacing and half the time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportCheck {
    pub eps: f64,
    pub t_end: f64,
    pub cells: [usize; 2],
    pub dt: [f64; 2],
    pub l2_error: [f64; 2],
    pub reduction: f64,
    pub tolerance: f64,
    pub min_reduction: f64,
    pub passed: bool,
}

pub const TRANSPORT_TOLERANCE: f64 = 5e-3;
pub const TRANSPORT_MIN_REDUCTION: f64 = 1.9;

pub fn transport_error(cfg: &ExperimentConfig, cells: usize, dt: f64) -> Result<f64> {
    let params = cfg.params.with_alpha(MobilityExponent::Infinity);
    let prof: Profile = cfg.profile()?;
    let grid = make_grid(1.0, params.outer_radius, cells, params.n_dim).map_err(HarnessError::run("grid"))?;
    let stepping = phasefield_core::solver::StepConfig { dt, ..cfg.stepping };
    let init = SolverState::initial(&grid, params, cfg.potential, &prof).map_err(HarnessError::run("initial condition"))?;
    let end = simulate_observed(init, &prof, &stepping, cfg.t_end, &[], |_| {}).map_err(HarnessError::run("simulate"))?;
    let c: &Field = &end[0].c;
    let exact = grid.sample(|r| transport_solution(r, cfg.t_end, &params, &prof));
    let d = c.zip_with(&exact, |a, b| a - b).map_err(HarnessError::run("compare"))?;
    Ok(integrate(&d.map(|x| x * x)).sqrt())
}

pub fn validate_transport(cfg: &ExperimentConfig) -> Result<TransportCheck> {
    let cells = cfg.cells_for(cfg.params.eps);
    let grid = make_grid(1.0, cfg.params.outer_radius, cells, cfg.params.n_dim).map_err(HarnessError::run("grid"))?;
    let dt = cfg.stepping.dt.min(cfg.stepping.cfl_limit(&grid, &cfg.params));
    let coarse = transport_error(cfg, cells, dt)?;
    let fine = transport_error(cfg, 2 * cells, dt / 2.0)?;
    let reduction = coarse / fine;
    Ok(TransportCheck {
        eps: cfg.params.eps,
        t_end: cfg.t_end,
        cells: [cells, 2 * cells],
        dt: [dt, dt / 2.0],
        l2_error: [coarse, fine],
        reduction,
        tolerance: TRANSPORT_TOLERANCE,
        min_reduction: TRANSPORT_MIN_REDUCTION,
        passed: coarse <= TRANSPORT_TOLERANCE && reduction >= TRANSPORT_MIN_REDUCTION,
    })
}

pub fn transport_table(check: &TransportCheck) -> Table {
    let mut t = Table::new(&["eps", "t_end", "cells", "dt", "l2_error"]);
    for k in 0..2 {
        t.push(vec![
            Cell::num(check.eps),
            Cell::num(check.t_end),
            Cell::num(check.cells[k] as f64),
            Cell::num(check.dt[k]),
            Cell::num(check.l2_error[k]),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn pool_preserves_order() {
        let jobs: Vec<u64> = (0..37).collect();
        let out = run_pool(&jobs, 5, |&k| {
            std::thread::sleep(std::time::Duration::from_micros((37 - k) * 50));
            k * k
        });
        assert_eq!(out, jobs.iter().map(|k| k * k).collect::<Vec<_>>());
        assert!(run_pool::<u8, u8>(&[], 3, |&k| k).is_empty());
    }

    #[test]
    fn zero_end_time_has_one_record() {
        let c = cfg(r#"{"t_end": 0.0}"#);
        let r = run_single(&c, c.params.eps, c.params.alpha).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.steps, 0);
        assert_eq!(r.deviations[0].h1w_time_integral, 0.0);
    }

    #[test]
    fn transport_run_tracks_radius() {
        let c = cfg(r#"{"t_end": 1.0, "grid": {"cells": 400}}"#);
        let r = run_single(&c, 0.1, MobilityExponent::Infinity).unwrap();
        let h = 4.0 / 400.0;
        let last = r.records.last().unwrap();
        let exact = *r.radius_analytic.last().unwrap();
        assert!((last.interface_radius.unwrap() - exact).abs() < h, "{:?} vs {exact}", last.interface_radius);
        assert_eq!(r.jumps.len(), 4);
        assert!(r.deviations.iter().all(|d| d.l2 < 0.05));
    }

    #[test]
    fn failed_cell_does_not_spoil_siblings() {
        let c = cfg(r#"{"t_end": 0.0, "sweep": {"eps": [0.2, 0.1, 0.05], "alpha": ["infinity"]}}"#);
        let ok = |e| RunOutcome::Ok(run_single(&c, e, MobilityExponent::Infinity).unwrap());
        let failed = RunOutcome::Failed { eps: 0.1, alpha: MobilityExponent::Infinity, error: "simulate failed: x".into() };
        let outcomes = vec![ok(0.2), failed, ok(0.05)];
        let table = sweep_table(&c, &outcomes);
        assert_eq!(table.rows.len(), 3);
        let status = table.column("status").unwrap();
        assert_eq!(table.rows[0][status], Cell::text("ok"));
        assert_eq!(table.rows[1][status], Cell::text("failed: simulate failed: x"));
        assert_eq!(table.rows[2][status], Cell::text("ok"));
        assert!(table.rows[1][3..status].iter().all(|c| *c == Cell::Num(None)));
        assert_eq!(table.rows[0][..status], sweep_table(&c, &outcomes[..1]).rows[0][..status]);
    }
}
