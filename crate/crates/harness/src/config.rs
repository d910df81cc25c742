//! Experiment configuration: a single JSON document, every section optional.

use std::path::{Path, PathBuf};

use phasefield_core::analytic::interface_radius;
use phasefield_core::physics::{MobilityExponent, ModelParams, Potential, Profile};
use phasefield_core::solver::{StepConfig, RESOLUTION_RULE};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub delta: f64,
    pub intervals: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { delta: Profile::DEFAULT_DELTA, intervals: Profile::DEFAULT_INTERVALS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Fixed cell count; when absent the count follows `cells_per_eps`.
    pub cells: Option<usize>,
    /// Target `ε/h` used to size the grid for each `ε`.
    pub cells_per_eps: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { cells: None, cells_per_eps: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub eps: Vec<f64>,
    pub alpha: Vec<MobilityExponent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpConfig {
    /// Half-width `δ_jump` of the two-sided pressure probe.
    pub delta_probe: f64,
    /// Further half-widths checked by `jump-sweep`.
    pub extra_delta_probes: Vec<f64>,
    /// Half-width of the bump paired against the discrepancy.
    pub pairing_half_width: f64,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig { delta_probe: 0.25, extra_delta_probes: vec![0.125], pairing_half_width: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub potential: Potential,
    pub profile: ProfileConfig,
    pub grid: GridConfig,
    pub stepping: StepConfig,
    pub t_end: f64,
    /// Snapshot times; defaults to `t_end/4, t_end/2, 3t_end/4, t_end`.
    pub probe_times: Vec<f64>,
    /// Defaults to the single point `(params.eps, params.alpha)`.
    pub sweep: SweepAxes,
    pub jump: JumpConfig,
    pub out_dir: PathBuf,
    pub format: Format,
    /// Worker threads for sweeps; defaults to the available parallelism.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: ModelParams::default(),
            potential: Potential::default(),
            profile: ProfileConfig::default(),
            grid: GridConfig::default(),
            stepping: StepConfig { dt: 1.0, ..StepConfig::default() },
            t_end: 1.0,
            probe_times: Vec::new(),
            sweep: SweepAxes::default(),
            jump: JumpConfig::default(),
            out_dir: PathBuf::from("out"),
            format: Format::Csv,
            workers: None,
        }
    }
}

/// Raw form used to tell an explicitly empty sweep list from a missing one.
#[derive(Deserialize)]
struct RawSweep {
    eps: Option<Vec<f64>>,
    alpha: Option<Vec<MobilityExponent>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let raw_sweep: Option<RawSweep> = value
            .get("sweep")
            .map(|s| serde_json::from_value(s.clone()))
            .transpose()
            .map_err(|e| HarnessError::Parse(e.to_string()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| HarnessError::Parse(e.to_string()))?;
        if let Some(raw) = &raw_sweep {
            if matches!(&raw.eps, Some(v) if v.is_empty()) {
                return Err(HarnessError::Validation("sweep: eps list is empty".into()));
            }
            if matches!(&raw.alpha, Some(v) if v.is_empty()) {
                return Err(HarnessError::Validation("sweep: alpha list is empty".into()));
            }
        }
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Replaces empty lists by their documented defaults.
    pub fn fill_defaults(&mut self) {
        if self.probe_times.is_empty() {
            self.probe_times = if self.t_end == 0.0 {
                vec![0.0]
            } else {
                (1..=4).map(|k| self.t_end * k as f64 / 4.0).collect()
            };
        }
        if self.sweep.eps.is_empty() {
            self.sweep.eps = vec![self.params.eps];
        }
        if self.sweep.alpha.is_empty() {
            self.sweep.alpha = vec![self.params.alpha];
        }
    }

    pub fn cells_for(&self, eps: f64) -> usize {
        self.grid
            .cells
            .unwrap_or_else(|| ((self.params.outer_radius - 1.0) * self.grid.cells_per_eps / eps).ceil() as usize)
    }

    pub fn profile(&self) -> Result<Profile> {
        Profile::new(self.profile.delta, self.profile.intervals, &self.potential)
            .map_err(|e| HarnessError::Validation(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Validation(m));
        self.params.validate().map_err(|e| HarnessError::Validation(format!("params: {e}")))?;
        self.stepping.validate().map_err(|e| HarnessError::Validation(format!("stepping: {e}")))?;
        self.profile()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        let r_end = interface_radius(self.t_end, &self.params);
        let limit = self.params.outer_radius - self.profile.delta;
        if r_end >= limit {
            return bad(format!("layer exits domain: R(t_end) = {r_end} >= M - δ = {limit}"));
        }
        if self.probe_times.windows(2).any(|w| w[1] <= w[0]) {
            return bad("probe_times must be strictly increasing".into());
        }
        if self.probe_times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return bad(format!("probe_times must lie in [0, {}]", self.t_end));
        }
        if self.sweep.eps.is_empty() {
            return bad("sweep: eps list is empty".into());
        }
        if self.sweep.alpha.is_empty() {
            return bad("sweep: alpha list is empty".into());
        }
        if self.sweep.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad("sweep: eps values must be strictly decreasing".into());
        }
        if self.sweep.eps.len() > 2 {
            let q = self.sweep.eps[0] / self.sweep.eps[1];
            if self.sweep.eps.windows(2).any(|w| ((w[0] / w[1]) / q - 1.0).abs() > 1e-9) {
                return bad("sweep: eps values must form a geometric sequence".into());
            }
        }
        for &eps in std::iter::once(&self.params.eps).chain(&self.sweep.eps) {
            let p = self.params.with_eps(eps);
            p.validate().map_err(|e| HarnessError::Validation(format!("sweep: {e}")))?;
            let cells = self.cells_for(eps);
            let h = (self.params.outer_radius - 1.0) / cells as f64;
            if eps / h < RESOLUTION_RULE * (1.0 - 1e-12) {
                return bad(format!(
                    "resolution rule: ε/h = {} < {RESOLUTION_RULE} for ε = {eps} with {cells} cells",
                    eps / h
                ));
            }
            let room = (self.params.r0 - 1.0).min(self.params.outer_radius - self.params.r0);
            if self.profile.delta * eps >= room {
                return bad(format!("initial layer of half-width δε = {} touches the boundary", self.profile.delta * eps));
            }
        }
        if !(self.jump.delta_probe > 0.0) || self.jump.extra_delta_probes.iter().any(|&d| !(d > 0.0)) {
            return bad("jump: probe half-widths must be positive".into());
        }
        let widest = self.jump.extra_delta_probes.iter().fold(self.jump.delta_probe, |m, &d| m.max(d));
        if self.params.r0 - widest <= 1.0 || r_end + widest >= self.params.outer_radius {
            return bad(format!("jump: probe half-width {widest} reaches past the domain"));
        }
        if !(self.jump.pairing_half_width > 0.0) {
            return bad("jump: pairing_half_width must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.profile.delta, 0.5);
        assert_eq!(cfg.jump.delta_probe, 0.25);
        let h = 4.0 / cfg.cells_for(cfg.params.eps) as f64;
        assert!(cfg.params.eps / h >= 8.0);
        assert_eq!(cfg.probe_times.len(), 4);
        assert_eq!(cfg.sweep.eps, vec![0.1]);
    }

    #[test]
    fn resolution_rule() {
        let e = ExperimentConfig::from_json(r#"{"params": {"eps": 0.1}, "grid": {"cells": 160}}"#).unwrap_err();
        assert!(e.to_string().contains("resolution rule"), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn layer_exits_domain() {
        let e = ExperimentConfig::from_json(r#"{"t_end": 12.0}"#).unwrap_err();
        assert!(e.to_string().contains("layer exits domain"), "{e}");
    }

    #[test]
    fn zero_end_time_probes_once() {
        let cfg = ExperimentConfig::from_json(r#"{"t_end": 0}"#).unwrap();
        assert_eq!(cfg.probe_times, vec![0.0]);
    }

    #[test]
    fn empty_alpha_list() {
        let e = ExperimentConfig::from_json(r#"{"sweep": {"eps": [0.1], "alpha": []}}"#).unwrap_err();
        assert!(e.to_string().contains("alpha list is empty"), "{e}");
    }

    #[test]
    fn sweep_must_be_decreasing_geometric() {
        let e = ExperimentConfig::from_json(r#"{"sweep": {"eps": [0.05, 0.1]}}"#).unwrap_err();
        assert!(e.to_string().contains("strictly decreasing"));
        let e = ExperimentConfig::from_json(r#"{"sweep": {"eps": [0.1, 0.05, 0.03]}}"#).unwrap_err();
        assert!(e.to_string().contains("geometric"));
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"eps": [0.08, 0.04, 0.02], "alpha": [4, "infinity"]}}"#).is_ok());
    }

    #[test]
    fn unknown_keys_and_bad_json() {
        assert_eq!(ExperimentConfig::from_json(r#"{"t_ned": 1}"#).unwrap_err().exit_code(), 1);
        assert_eq!(ExperimentConfig::from_json("{").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn round_trip_echo() {
        let cfg = ExperimentConfig::from_json(r#"{"params": {"a": 0.5, "alpha": 4}}"#).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&echo).unwrap(), cfg);
    }
}
