//! Pressure-jump pipeline on closed-form zero-mobility profiles. No time
//! stepping is involved.

use phasefield_core::analytic::{
    compressed_layer_jump, compressed_layer_xi_amplitude, interface_state, transport_solution,
    transport_solution_deriv, xi_limit_amplitude, young_laplace_jump,
};
use phasefield_core::diagnostics::bump;
use phasefield_core::pressure::{jump, jump_extrapolate_by, richardson, Extrapolation, JumpMeasurement, PressureDecomposition};
use phasefield_core::{integrate, make_grid, MobilityExponent};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

pub const JUMP_COLUMNS: [&str; 12] = [
    "t_probe",
    "eps",
    "delta_probe",
    "cells",
    "jump_total",
    "jump_p1",
    "jump_p2",
    "jump_p3",
    "jump_young_laplace",
    "kappa_target",
    "compression",
    "pairing",
];

/// Measurements of one `(t, ε)` profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub eps: f64,
    pub cells: usize,
    pub jumps: Vec<JumpMeasurement>,
    /// `∫ ξ_ε φ r^{n-1} dr` for the bump `φ` centred at `R(t)`.
    pub pairing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpLimit {
    pub t: f64,
    pub delta_probe: f64,
    pub young_laplace: f64,
    pub kappa: f64,
    pub compression: f64,
    pub total: Extrapolation,
    pub p1: Extrapolation,
    /// Largest `|p₂|` jump over the series.
    pub p2_max_abs: f64,
    /// Inside-minus-outside limit over the Young-Laplace value.
    pub ratio: f64,
    /// Closed-form limit of the compressed layer, `σ J (n-1)/R`.
    pub compressed_layer_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingLimit {
    pub t: f64,
    pub half_width: f64,
    pub extrapolated: Extrapolation,
    /// `(σκ - σ̃) R^{n-1} |S^{n-1}| φ(R)`.
    pub amplified_target: f64,
    /// `(σJ/2 - σ̃/J) R^{n-1} φ(R)`, the limit of the compressed layer.
    pub compressed_layer_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSweep {
    pub samples: Vec<ProfileSample>,
    pub limits: Vec<JumpLimit>,
    pub pairings: Vec<PairingLimit>,
    pub notes: Vec<String>,
}

fn probe_widths(cfg: &ExperimentConfig) -> Vec<f64> {
    let mut v = vec![cfg.jump.delta_probe];
    v.extend(cfg.jump.extra_delta_probes.iter().copied().filter(|d| *d != cfg.jump.delta_probe));
    v
}

pub fn sample_profile(cfg: &ExperimentConfig, t: f64, eps: f64) -> Result<ProfileSample> {
    let params = cfg.params.with_eps(eps).with_alpha(MobilityExponent::Infinity);
    let prof = cfg.profile()?;
    let cells = cfg.cells_for(eps);
    let grid = make_grid(1.0, params.outer_radius, cells, params.n_dim).map_err(HarnessError::run("grid"))?;
    let c = grid.sample(|r| transport_solution(r, t, &params, &prof));
    let g = grid.sample(|r| transport_solution_deriv(r, t, &params, &prof));
    let dec = PressureDecomposition::from_gradient(&g, &params);
    let radius = interface_state(t, &params).radius;
    let jumps = probe_widths(cfg)
        .into_iter()
        .map(|d| jump(&dec, t, radius, d))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(HarnessError::run("pressure jump"))?;
    let phi = bump(radius, cfg.jump.pairing_half_width);
    let pot = cfg.potential;
    let xi = c.zip_with(&g, |v, d| 0.5 * eps * d * d - pot.f(v) / eps).map_err(HarnessError::run("pairing"))?;
    let pairing = integrate(&xi.map_with_r(|r, v| v * phi(r)));
    Ok(ProfileSample { t, eps, cells, jumps, pairing })
}

pub fn jump_sweep(cfg: &ExperimentConfig) -> Result<JumpSweep> {
    let prof = cfg.profile()?;
    let mut samples = Vec::new();
    let mut limits = Vec::new();
    let mut pairings = Vec::new();
    let mut notes = Vec::new();
    let widths = probe_widths(cfg);
    for &t in &cfg.probe_times {
        let series: Vec<ProfileSample> =
            cfg.sweep.eps.iter().map(|&e| sample_profile(cfg, t, e)).collect::<Result<_>>()?;
        let params = cfg.params;
        let ist = interface_state(t, &params);
        let yl = young_laplace_jump(t, &params, prof.sigma_profile());
        for (k, &d) in widths.iter().enumerate() {
            let ms: Vec<JumpMeasurement> = series.iter().map(|s| s.jumps[k]).collect();
            let (total, p1) = match (jump_extrapolate_by(&ms, |m| m.value), jump_extrapolate_by(&ms, |m| m.p1)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    notes.push(format!("t = {t}, δ = {d}: extrapolation skipped: {e}"));
                    continue;
                }
            };
            limits.push(JumpLimit {
                t,
                delta_probe: d,
                young_laplace: yl,
                kappa: ist.kappa,
                compression: ist.compression,
                total,
                p1,
                p2_max_abs: ms.iter().map(|m| m.p2.abs()).fold(0.0, f64::max),
                ratio: -total.value / yl,
                compressed_layer_jump: compressed_layer_jump(t, &params, &prof),
            });
        }
        let eps: Vec<f64> = series.iter().map(|s| s.eps).collect();
        let vals: Vec<f64> = series.iter().map(|s| s.pairing).collect();
        match richardson(&eps, &vals) {
            Ok(extrapolated) => {
                let phi_r = bump(ist.radius, cfg.jump.pairing_half_width)(ist.radius);
                let rn = ist.radius.powi(params.n_dim as i32 - 1);
                pairings.push(PairingLimit {
                    t,
                    half_width: cfg.jump.pairing_half_width,
                    extrapolated,
                    amplified_target: xi_limit_amplitude(t, &params, &prof)
                        * rn
                        * phasefield_core::analytic::unit_sphere_area(params.n_dim)
                        * phi_r,
                    compressed_layer_target: compressed_layer_xi_amplitude(t, &params, &prof) * rn * phi_r,
                });
            }
            Err(e) => notes.push(format!("t = {t}: pairing extrapolation skipped: {e}")),
        }
        samples.extend(series);
    }
    Ok(JumpSweep { samples, limits, pairings, notes })
}

pub fn jump_table(cfg: &ExperimentConfig, sweep: &JumpSweep) -> Result<Table> {
    let prof = cfg.profile()?;
    let mut t = Table::new(&JUMP_COLUMNS);
    for s in &sweep.samples {
        let ist = interface_state(s.t, &cfg.params);
        let yl = young_laplace_jump(s.t, &cfg.params, prof.sigma_profile());
        for j in &s.jumps {
            t.push(vec![
                Cell::num(s.t),
                Cell::num(s.eps),
                Cell::num(j.delta_probe),
                Cell::num(s.cells as f64),
                Cell::num(j.inside_minus_outside()),
                Cell::num(-j.p1),
                Cell::num(-j.p2),
                Cell::num(-j.p3),
                Cell::num(yl),
                Cell::num(ist.kappa),
                Cell::num(ist.compression),
                Cell::num(s.pairing),
            ]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_vanishes_and_p1_dominates() {
        let cfg = ExperimentConfig::from_json(
            r#"{"t_end": 3.0, "probe_times": [3.0], "sweep": {"eps": [0.1, 0.05, 0.025]}, "grid": {"cells_per_eps": 10}}"#,
        )
        .unwrap();
        let js = jump_sweep(&cfg).unwrap();
        assert_eq!(js.samples.len(), 3);
        assert_eq!(js.limits.len(), 2);
        for l in &js.limits {
            assert_eq!(l.p2_max_abs, 0.0);
            assert!(l.ratio > 1.0, "{l:?}");
        }
        let table = jump_table(&cfg, &js).unwrap();
        assert_eq!(table.rows.len(), 6);
    }
}
