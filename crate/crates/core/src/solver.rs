//! Time stepping for the radial convective Cahn-Hilliard system
//!
//! ```text
//! ∂_t c + u ∂_r c = m Δ̃ μ,    μ = -ε Δ̃ c + f'(c)/ε,
//! ```
//!
//! with `c(1) = 1`, `c(M) = -1`, zero flux of `μ` through both ends and
//! `m = m̃ ε^α`.
//!
//! One step is a Lie splitting. The transport part is advanced explicitly
//! with SSP-RK3; the Cahn-Hilliard part with the linearly stabilized
//! semi-implicit scheme
//!
//! ```text
//! (c⁺ - c*)/dt = m Lμ,   μ = -ε Δ̃c⁺ + f'(c*)/ε + (β/ε)(c⁺ - c*),
//! ```
//!
//! whose matrix does not depend on the state and is factored once per `dt`.
//! `μ` lives on the interior nodes; the faces next to the boundary nodes carry
//! zero flux. The end values of the `μ` field copy their neighbours.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{interface_radius, velocity};
use crate::banded::{BandLu, BandMatrix};
use crate::error::{invalid, Error, Result};
use crate::grid::{integrate, radial_laplacian, BoundaryClosure, Field, RadialGrid};
use crate::physics::{initial_condition, ModelParams, Potential, Profile};

/// Minimum number of grid cells per unit of `ε`.
pub const RESOLUTION_RULE: f64 = 8.0;
/// Default run-level bound on `‖c‖_∞`.
pub const DEFAULT_BOUND: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvectionScheme {
    /// Fifth-order upwind-biased differences, third-order and central near
    /// the boundary.
    #[default]
    Upwind5,
    /// Second-order upwind differences, central at the first interior node.
    Upwind2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepConfig {
    /// Largest time step; [`simulate`] may shrink it to honour the CFL limit
    /// and to land on probe times.
    pub dt: f64,
    /// Stabilization `β`. Energy stability for `a = 0` needs
    /// `β >= max_{|c|<=B} f''(c)/2`.
    pub stabilization: f64,
    pub cfl_safety: f64,
    #[serde(default)]
    pub scheme: ConvectionScheme,
    #[serde(default = "default_bound")]
    pub bound: f64,
    /// First step of an optional geometric start-up ramp; steps grow by
    /// `startup_growth` until they reach `dt`.
    #[serde(default)]
    pub startup_dt: Option<f64>,
    #[serde(default = "default_growth")]
    pub startup_growth: f64,
}

fn default_growth() -> f64 {
    1.1
}

fn default_bound() -> f64 {
    DEFAULT_BOUND
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            dt: 1e-3,
            stabilization: 1.5,
            cfl_safety: 0.5,
            scheme: ConvectionScheme::Upwind5,
            bound: DEFAULT_BOUND,
            startup_dt: None,
            startup_growth: default_growth(),
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.stabilization >= 0.0 && self.stabilization.is_finite()) {
            return Err(invalid(format!("stabilization must be >= 0, got {}", self.stabilization)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(invalid(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.bound >= 1.0 && self.bound.is_finite()) {
            return Err(invalid(format!("bound must be >= 1, got {}", self.bound)));
        }
        if let Some(d) = self.startup_dt {
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid(format!("startup_dt must be positive, got {d}")));
            }
        }
        if !(self.startup_growth > 1.0 && self.startup_growth.is_finite()) {
            return Err(invalid(format!("startup_growth must exceed 1, got {}", self.startup_growth)));
        }
        Ok(())
    }

    /// Largest step allowed by the convective CFL condition on `grid`.
    pub fn cfl_limit(&self, grid: &RadialGrid, params: &ModelParams) -> f64 {
        let umax = velocity(grid.r_min(), params).abs();
        if umax == 0.0 {
            f64::INFINITY
        } else {
            self.cfl_safety * grid.h() / umax
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub c: Field,
    pub mu: Field,
    pub params: ModelParams,
    pub potential: Potential,
    pub step_count: usize,
    /// Accumulated `∫ m |∂_r μ|² r^{n-1} dr dt` (discrete).
    pub dissipation: f64,
    /// Accumulated `∫ μ u ∂_r c r^{n-1} dr dt = a ∫∫ μ ∂_r c dr dt`
    /// (discrete, from the transport sub-steps).
    pub convective_work: f64,
    /// Largest step-to-step increase of the scheme energy seen so far.
    pub max_energy_rise: f64,
}

impl SolverState {
    /// Wraps `c` as a state at time zero. The Dirichlet values are imposed.
    pub fn new(c: Field, params: ModelParams, potential: Potential) -> Result<Self> {
        params.validate()?;
        check_grid(c.grid(), &params)?;
        let grid = Arc::clone(c.grid());
        let mut v = c.into_values();
        enforce_dirichlet(&mut v);
        let c = Field::new(grid, v)?;
        let mu = scheme_chemical_potential(&c, &params, &potential);
        Ok(SolverState {
            t: 0.0,
            c,
            mu,
            params,
            potential,
            step_count: 0,
            dissipation: 0.0,
            convective_work: 0.0,
            max_energy_rise: f64::NEG_INFINITY,
        })
    }

    pub fn initial(
        grid: &Arc<RadialGrid>,
        params: ModelParams,
        potential: Potential,
        prof: &Profile,
    ) -> Result<Self> {
        let c = initial_condition(grid, &params, prof)?;
        SolverState::new(c, params, potential)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.c.grid()
    }

    pub fn mass(&self) -> f64 {
        integrate(&self.c)
    }

    pub fn scheme_energy(&self) -> f64 {
        scheme_energy(&self.c, &self.params, &self.potential)
    }
}

fn check_grid(grid: &Arc<RadialGrid>, params: &ModelParams) -> Result<()> {
    if grid.n_dim() != params.n_dim {
        return Err(invalid(format!(
            "grid dimension {} differs from model dimension {}",
            grid.n_dim(),
            params.n_dim
        )));
    }
    if grid.r_min() != 1.0 || grid.r_max() != params.outer_radius {
        return Err(invalid(format!(
            "grid spans [{}, {}], model domain is [1, {}]",
            grid.r_min(),
            grid.r_max(),
            params.outer_radius
        )));
    }
    if grid.len() < 6 {
        return Err(invalid("solver needs at least 5 cells"));
    }
    Ok(())
}

fn enforce_dirichlet(v: &mut [f64]) {
    let n = v.len();
    v[0] = 1.0;
    v[n - 1] = -1.0;
}

/// `μ = -ε Δ̃c + f'(c)/ε` with the one-sided boundary closure of the
/// Laplacian at the end nodes.
pub fn chemical_potential(c: &Field, params: &ModelParams, pot: &Potential) -> Field {
    let lap = radial_laplacian(c, BoundaryClosure::OneSided);
    let eps = params.eps;
    let v: Vec<f64> = lap
        .values()
        .iter()
        .zip(c.values())
        .map(|(l, &ci)| -eps * l + pot.df(ci) / eps)
        .collect();
    Field::from_raw(Arc::clone(c.grid()), v)
}

/// The chemical potential used by the scheme: flux-form Laplacian on the
/// interior, end values copied from the neighbours.
fn scheme_chemical_potential(c: &Field, params: &ModelParams, pot: &Potential) -> Field {
    let mut v = interior_mu(c.grid(), c.values(), params, pot);
    let n = v.len();
    v[0] = v[1];
    v[n - 1] = v[n - 2];
    Field::from_raw(Arc::clone(c.grid()), v)
}

fn interior_mu(grid: &RadialGrid, c: &[f64], params: &ModelParams, pot: &Potential) -> Vec<f64> {
    let (a, w, h) = (grid.face_coef(), grid.weights(), grid.h());
    let eps = params.eps;
    let n = c.len();
    let mut mu = vec![0.0; n];
    for i in 1..n - 1 {
        let k = (a[i] * (c[i + 1] - c[i]) - a[i - 1] * (c[i] - c[i - 1])) / h;
        mu[i] = -eps * k / w[i] + pot.df(c[i]) / eps;
    }
    mu
}

/// Discrete free energy the scheme dissipates:
/// `Σ_faces (ε/2) A (Δc)²/h + Σ_nodes w f(c)/ε`.
pub fn scheme_energy(c: &Field, params: &ModelParams, pot: &Potential) -> f64 {
    let g = c.grid();
    let (a, w, h) = (g.face_coef(), g.weights(), g.h());
    let v = c.values();
    let eps = params.eps;
    let grad: f64 = (0..v.len() - 1)
        .map(|i| a[i] * (v[i + 1] - v[i]).powi(2))
        .sum::<f64>()
        * 0.5
        * eps
        / h;
    let bulk: f64 = v.iter().zip(w).map(|(&ci, wi)| wi * pot.f(ci)).sum::<f64>() / eps;
    grad + bulk
}

/// Upwind-biased approximation of `∂_r c` at interior node `i` for `u >= 0`.
fn convective_derivative(c: &[f64], i: usize, h: f64, scheme: ConvectionScheme) -> f64 {
    let n = c.len();
    match scheme {
        ConvectionScheme::Upwind5 => {
            if i == 1 || i == n - 2 {
                (c[i + 1] - c[i - 1]) / (2.0 * h)
            } else if i == 2 || i == n - 3 {
                (c[i - 2] - 6.0 * c[i - 1] + 3.0 * c[i] + 2.0 * c[i + 1]) / (6.0 * h)
            } else {
                (-2.0 * c[i - 3] + 15.0 * c[i - 2] - 60.0 * c[i - 1] + 20.0 * c[i] + 30.0 * c[i + 1]
                    - 3.0 * c[i + 2])
                    / (60.0 * h)
            }
        }
        ConvectionScheme::Upwind2 => {
            if i == 1 {
                (c[2] - c[0]) / (2.0 * h)
            } else {
                (3.0 * c[i] - 4.0 * c[i - 1] + c[i - 2]) / (2.0 * h)
            }
        }
    }
}

/// Reusable stepping context: velocity samples and the factored implicit
/// operator for the current `dt`.
struct Stepper {
    grid: Arc<RadialGrid>,
    cfg: StepConfig,
    params: ModelParams,
    pot: Potential,
    u: Vec<f64>,
    implicit: Option<Implicit>,
}

struct Implicit {
    dt: f64,
    lu: BandLu,
    mob_dt: f64,
}

impl Stepper {
    fn new(grid: &Arc<RadialGrid>, params: ModelParams, pot: Potential, cfg: StepConfig) -> Self {
        let u = grid.nodes().iter().map(|&r| velocity(r, &params)).collect();
        Stepper { grid: Arc::clone(grid), cfg, params, pot, u, implicit: None }
    }

    fn transport_rhs(&self, c: &[f64], out: &mut [f64]) {
        let h = self.grid.h();
        let n = c.len();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            out[i] = -self.u[i] * convective_derivative(c, i, h, self.cfg.scheme);
        }
    }

    fn transport(&self, c: &[f64], dt: f64) -> Vec<f64> {
        let n = c.len();
        let mut k = vec![0.0; n];
        self.transport_rhs(c, &mut k);
        let c1: Vec<f64> = (0..n).map(|i| c[i] + dt * k[i]).collect();
        self.transport_rhs(&c1, &mut k);
        let c2: Vec<f64> = (0..n).map(|i| 0.75 * c[i] + 0.25 * (c1[i] + dt * k[i])).collect();
        self.transport_rhs(&c2, &mut k);
        let mut c3: Vec<f64> = (0..n).map(|i| c[i] / 3.0 + 2.0 / 3.0 * (c2[i] + dt * k[i])).collect();
        enforce_dirichlet(&mut c3);
        c3
    }

    /// Entries of the interior rows of `G` (μ-flux operator, zero flux at the
    /// two outermost faces) as `(left, centre, right)`.
    fn g_row(&self, i: usize) -> (f64, f64, f64) {
        let (a, h) = (self.grid.face_coef(), self.grid.h());
        let last = self.grid.len() - 2;
        let left = if i > 1 { a[i - 1] / h } else { 0.0 };
        let right = if i < last { a[i] / h } else { 0.0 };
        (left, -(left + right), right)
    }

    /// Rows of `P = -ε W⁻¹ K + (β/ε) I` restricted to interior unknowns.
    fn p_row(&self, i: usize) -> (f64, f64, f64) {
        let (a, w, h) = (self.grid.face_coef(), self.grid.weights(), self.grid.h());
        let eps = self.params.eps;
        let s = -eps / (w[i] * h);
        (
            s * a[i - 1],
            -s * (a[i - 1] + a[i]) + self.cfg.stabilization / eps,
            s * a[i],
        )
    }

    fn implicit_for(&mut self, dt: f64, step: usize, t: f64) -> Result<&Implicit> {
        let fresh = matches!(&self.implicit, Some(imp) if imp.dt == dt);
        if !fresh {
            let ni = self.grid.len() - 2;
            let mob_dt = self.params.mobility() * dt;
            let w = self.grid.weights();
            let mut m = BandMatrix::zeros(ni, 2, 2);
            for i in 1..=ni {
                let row = i - 1;
                m.add(row, row, w[i]);
                let g = self.g_row(i);
                for (dk, gk) in [(-1isize, g.0), (0, g.1), (1, g.2)] {
                    if gk == 0.0 {
                        continue;
                    }
                    let k = (i as isize + dk) as usize;
                    if k < 1 || k > ni {
                        continue;
                    }
                    let p = self.p_row(k);
                    for (dj, pj) in [(-1isize, p.0), (0, p.1), (1, p.2)] {
                        let j = k as isize + dj;
                        if j < 1 || j as usize > ni {
                            continue;
                        }
                        m.add(row, j as usize - 1, -mob_dt * gk * pj);
                    }
                }
            }
            let lu = m.factor().map_err(|row| Error::SingularSystem { row: row + 1, step, t })?;
            self.implicit = Some(Implicit { dt, lu, mob_dt });
        }
        Ok(self.implicit.as_ref().expect("factored above"))
    }

    /// Cahn-Hilliard sub-step. Returns `(c⁺, μ, dissipation increment)`.
    fn diffuse(&mut self, cs: &[f64], dt: f64, step: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let n = cs.len();
        let ni = n - 2;
        let eps = self.params.eps;
        let beta = self.cfg.stabilization;
        let grid = Arc::clone(&self.grid);
        let (a, w, h) = (grid.face_coef(), grid.weights(), grid.h());
        // μ = P c_int + q
        let mut q = vec![0.0; n];
        for i in 1..n - 1 {
            q[i] = (self.pot.df(cs[i]) - beta * cs[i]) / eps;
        }
        q[1] += -eps * a[0] * cs[0] / (w[1] * h);
        q[n - 2] += -eps * a[n - 2] * cs[n - 1] / (w[n - 2] * h);

        let g_rows: Vec<(f64, f64, f64)> = (1..n - 1).map(|i| self.g_row(i)).collect();
        let p_rows: Vec<(f64, f64, f64)> = (1..n - 1).map(|i| self.p_row(i)).collect();
        let imp = self.implicit_for(dt, step, t)?;
        let mob_dt = imp.mob_dt;
        let mut rhs = vec![0.0; ni];
        for i in 1..n - 1 {
            let g = g_rows[i - 1];
            let gq = g.0 * q[i - 1] + g.1 * q[i] + g.2 * q[i + 1];
            rhs[i - 1] = w[i] * cs[i] + mob_dt * gq;
        }
        imp.lu.solve(&mut rhs);
        let mut c = cs.to_vec();
        c[1..n - 1].copy_from_slice(&rhs);

        let mut mu = vec![0.0; n];
        for i in 1..n - 1 {
            let p = p_rows[i - 1];
            let left = if i > 1 { p.0 * c[i - 1] } else { 0.0 };
            let right = if i < n - 2 { p.2 * c[i + 1] } else { 0.0 };
            mu[i] = left + p.1 * c[i] + right + q[i];
        }
        mu[0] = mu[1];
        mu[n - 1] = mu[n - 2];
        // Rebuild c⁺ from the face fluxes of μ so that the interior mass
        // changes only by telescoping sums, not by the solve's roundoff.
        let flux: Vec<f64> = (0..n - 1)
            .map(|f| if f == 0 || f == n - 2 { 0.0 } else { a[f] * (mu[f + 1] - mu[f]) / h })
            .collect();
        for i in 1..n - 1 {
            c[i] = cs[i] + mob_dt * (flux[i] - flux[i - 1]) / w[i];
        }
        let diss = mob_dt * (1..n - 2).map(|f| flux[f] * (mu[f + 1] - mu[f])).sum::<f64>();
        Ok((c, mu, diss))
    }

    fn step(&mut self, state: &SolverState, dt: f64) -> Result<SolverState> {
        let step = state.step_count + 1;
        let t_new = state.t + dt;
        let cfl = self.cfg.cfl_limit(&self.grid, &self.params);
        if dt > cfl * (1.0 + 1e-12) {
            return Err(invalid(format!("dt = {dt} violates the CFL limit {cfl}")));
        }
        let c0 = state.c.values();
        let n = c0.len();

        let mut work = 0.0;
        let cs = if self.params.inflow_speed != 0.0 {
            let cs = self.transport(c0, dt);
            // Work of the transport increment against the midpoint potential.
            let mid: Vec<f64> = c0.iter().zip(&cs).map(|(x, y)| 0.5 * (x + y)).collect();
            let mu_mid = interior_mu(&self.grid, &mid, &self.params, &self.pot);
            let w = self.grid.weights();
            work = -(1..n - 1).map(|i| w[i] * mu_mid[i] * (cs[i] - c0[i])).sum::<f64>();
            cs
        } else {
            c0.to_vec()
        };

        let (c, mu, diss) = if self.params.mobility() > 0.0 {
            self.diffuse(&cs, dt, step, t_new)?
        } else {
            let mut mu = interior_mu(&self.grid, &cs, &self.params, &self.pot);
            mu[0] = mu[1];
            mu[n - 1] = mu[n - 2];
            (cs, mu, 0.0)
        };

        if !c.iter().chain(&mu).all(|v| v.is_finite()) {
            return Err(Error::NonFinite { step, t: t_new });
        }
        let linf = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if linf > self.cfg.bound {
            return Err(Error::BoundViolation { bound: self.cfg.bound, value: linf, step, t: t_new });
        }
        let c = Field::from_raw(Arc::clone(&self.grid), c);
        let rise = scheme_energy(&c, &self.params, &self.pot) - scheme_energy(&state.c, &self.params, &self.pot);
        Ok(SolverState {
            t: t_new,
            c,
            mu: Field::from_raw(Arc::clone(&self.grid), mu),
            params: state.params,
            potential: state.potential,
            step_count: step,
            dissipation: state.dissipation + diss,
            convective_work: state.convective_work + work,
            max_energy_rise: state.max_energy_rise.max(rise),
        })
    }
}

/// Advances `state` by exactly `cfg.dt`.
pub fn step(state: &SolverState, cfg: &StepConfig) -> Result<SolverState> {
    cfg.validate()?;
    let mut stepper = Stepper::new(state.grid(), state.params, state.potential, *cfg);
    stepper.step(state, cfg.dt)
}

/// Runs from the initial condition to `t_end` and returns one snapshot per
/// probe time (sorted, inside `[0, t_end]`). With no probe times the single
/// snapshot is taken at `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    params: &ModelParams,
    pot: &Potential,
    prof: &Profile,
    grid: &Arc<RadialGrid>,
    cfg: &StepConfig,
    t_end: f64,
    probe_times: &[f64],
) -> Result<Vec<SolverState>> {
    let init = SolverState::initial(grid, *params, *pot, prof)?;
    simulate_from(init, prof, cfg, t_end, probe_times)
}

/// Like [`simulate`] but starting from an arbitrary state at time zero.
pub fn simulate_from(
    init: SolverState,
    prof: &Profile,
    cfg: &StepConfig,
    t_end: f64,
    probe_times: &[f64],
) -> Result<Vec<SolverState>> {
    simulate_observed(init, prof, cfg, t_end, probe_times, |_| {})
}

/// Like [`simulate_from`], calling `observer` on the initial state and after
/// every accepted step.
pub fn simulate_observed(
    init: SolverState,
    prof: &Profile,
    cfg: &StepConfig,
    t_end: f64,
    probe_times: &[f64],
    mut observer: impl FnMut(&SolverState),
) -> Result<Vec<SolverState>> {
    cfg.validate()?;
    let params = init.params;
    let grid = Arc::clone(init.grid());
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("t_end must be >= 0, got {t_end}")));
    }
    let r_end = interface_radius(t_end, &params);
    if r_end >= params.outer_radius - prof.delta() {
        return Err(invalid(format!(
            "layer exits domain: R(t_end) = {r_end} >= M - δ = {}",
            params.outer_radius - prof.delta()
        )));
    }
    let per_eps = params.eps / grid.h();
    if per_eps < RESOLUTION_RULE * (1.0 - 1e-12) {
        return Err(invalid(format!(
            "resolution rule: ε/h = {per_eps} < {RESOLUTION_RULE}"
        )));
    }
    let mut probes = probe_times.to_vec();
    if probes.is_empty() {
        probes.push(t_end);
    }
    if probes.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("probe times must be sorted"));
    }
    if probes.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
        return Err(invalid(format!("probe times must lie in [0, {t_end}]")));
    }

    let dt_max = cfg.dt.min(cfg.cfl_limit(&grid, &params));
    let mut stepper = Stepper::new(&grid, params, init.potential, *cfg);
    let mut state = init;
    observer(&state);
    let mut out = Vec::with_capacity(probes.len());
    let mut t0 = 0.0;
    let mut ramp = cfg.startup_dt.map(|d| d.min(dt_max)).unwrap_or(dt_max);
    for &tp in &probes {
        // Geometric start-up steps, then a uniform partition of the rest.
        while ramp < dt_max && tp - t0 > 2.0 * ramp {
            state = stepper.step(&state, ramp)?;
            observer(&state);
            t0 = state.t;
            ramp = (ramp * cfg.startup_growth).min(dt_max);
        }
        let span = tp - t0;
        if span > 0.0 {
            let steps = (span / dt_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for k in 0..steps {
                let mut next = stepper.step(&state, dt)?;
                if k + 1 == steps {
                    next.t = tp;
                }
                state = next;
                observer(&state);
            }
            t0 = tp;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Energy balance over one interval between consecutive snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub energy_start: f64,
    pub energy_change: f64,
    pub dissipation: f64,
    pub convective_work: f64,
    /// `ΔE + dissipation + convective work`.
    pub residual: f64,
    /// `ΔE + dissipation`, the balance without convective work.
    pub residual_without_work: f64,
}

impl BalanceInterval {
    /// `|residual| / (Δt · E_ref)`.
    pub fn relative_rate(&self, energy_ref: f64) -> f64 {
        self.residual.abs() / ((self.t_end - self.t_start) * energy_ref)
    }
}

pub fn power_balance(trajectory: &[SolverState]) -> Vec<BalanceInterval> {
    trajectory
        .windows(2)
        .map(|w| {
            let (s0, s1) = (&w[0], &w[1]);
            let e0 = s0.scheme_energy();
            let de = s1.scheme_energy() - e0;
            let diss = s1.dissipation - s0.dissipation;
            let work = s1.convective_work - s0.convective_work;
            BalanceInterval {
                t_start: s0.t,
                t_end: s1.t,
                energy_start: e0,
                energy_change: de,
                dissipation: diss,
                convective_work: work,
                residual: de + diss + work,
                residual_without_work: de + diss,
            }
        })
        .collect()
}
