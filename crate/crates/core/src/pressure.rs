//! Radial pressure reconstruction and two-sided jump probes.
//!
//! The pressure gradient splits into a capillary quadrature part `p₁`, a
//! pointwise capillary part `p₂ = -ε|∂_r c|²` and a velocity part `p₃`.
//! `p₁` and `p₃` are gauged to vanish at `r = M`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{deriv_r, radial_laplacian, BoundaryClosure, Field};
use crate::physics::ModelParams;

/// Velocity part of `∂_r p` for `u = a r^{1-n}`:
/// `-ρ u ∂_r u + ν Δ̃u = ρ a² (n-1) r^{1-2n} + ν a (n-1) r^{-n-1}`.
pub fn velocity_pressure_gradient(r: f64, params: &ModelParams) -> f64 {
    let n = params.n_dim as i32;
    let a = params.inflow_speed;
    let nm1 = f64::from(n - 1);
    params.density * a * a * nm1 * r.powi(1 - 2 * n) + params.viscosity * a * nm1 * r.powi(-n - 1)
}

/// `p₃(r) = -ρ a² r^{2-2n}/2 - ν a (n-1) r^{-n}/n`, shifted so `p₃(M) = 0`.
pub fn velocity_pressure(r: f64, params: &ModelParams) -> f64 {
    let raw = |r: f64| {
        let n = params.n_dim as i32;
        let a = params.inflow_speed;
        -0.5 * params.density * a * a * r.powi(2 - 2 * n)
            - params.viscosity * a * f64::from(n - 1) * r.powi(-n) / f64::from(n)
    };
    raw(r) - raw(params.outer_radius)
}

/// The velocity part with the alternative leading coefficient
/// `a(n-1)/(2n+2) r^{2-2n}` in place of `-ρ a² r^{2-2n}/2`, gauged the same
/// way. Kept for comparison only.
pub fn velocity_pressure_printed(r: f64, params: &ModelParams) -> f64 {
    let raw = |r: f64| {
        let n = params.n_dim as i32;
        let a = params.inflow_speed;
        a * f64::from(n - 1) / f64::from(2 * n + 2) * r.powi(2 - 2 * n)
            - params.viscosity * a * f64::from(n - 1) * r.powi(-n) / f64::from(n)
    };
    raw(r) - raw(params.outer_radius)
}

/// Full right-hand side of the radial pressure equation, nodewise:
/// `-ε(n-1)/r |∂_r c|² - ε ∂_r |∂_r c|² - ρ u ∂_r u + ν Δ̃u`.
pub fn pressure_gradient(c: &Field, params: &ModelParams) -> Field {
    let g = deriv_r(c);
    let g2 = g.map(|v| v * v);
    let dg2 = deriv_r(&g2);
    let eps = params.eps;
    let nm1 = f64::from(params.n_dim - 1);
    let grid = c.grid();
    let v = grid
        .nodes()
        .iter()
        .zip(g2.values().iter().zip(dg2.values()))
        .map(|(&r, (&q, &dq))| -eps * nm1 * q / r - eps * dq + velocity_pressure_gradient(r, params))
        .collect();
    Field::from_raw(Arc::clone(grid), v)
}

/// `Δ̃u` evaluated with the grid operator, for cross-checking
/// [`velocity_pressure_gradient`].
pub fn discrete_velocity_laplacian(grid: &Arc<crate::grid::RadialGrid>, params: &ModelParams) -> Field {
    let u = grid.sample(|r| crate::analytic::velocity(r, params));
    radial_laplacian(&u, BoundaryClosure::OneSided)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `p₁(M) = p₃(M) = 0`.
    OuterZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureDecomposition {
    pub p1: Field,
    pub p2: Field,
    pub p3: Field,
    pub total: Field,
    pub gauge: Gauge,
    pub eps: f64,
}

impl PressureDecomposition {
    /// Decomposition from a phase field, using [`deriv_r`] for `∂_r c`.
    pub fn decompose(c: &Field, params: &ModelParams) -> Self {
        Self::from_gradient(&deriv_r(c), params)
    }

    /// Decomposition from nodal values `g` of `∂_r c`. `p₁` integrates
    /// `ε(n-1) g²/r` inward from `M` with the trapezoidal rule.
    pub fn from_gradient(g: &Field, params: &ModelParams) -> Self {
        let grid = g.grid();
        let r = grid.nodes();
        let h = grid.h();
        let eps = params.eps;
        let nm1 = f64::from(params.n_dim - 1);
        let q: Vec<f64> = r.iter().zip(g.values()).map(|(&r, &g)| eps * nm1 * g * g / r).collect();
        let n = q.len();
        let mut p1 = vec![0.0; n];
        for i in (0..n - 1).rev() {
            p1[i] = p1[i + 1] + 0.5 * h * (q[i] + q[i + 1]);
        }
        let p2: Vec<f64> = g.values().iter().map(|v| -eps * v * v).collect();
        let p3: Vec<f64> = r.iter().map(|&r| velocity_pressure(r, params)).collect();
        let total = (0..n).map(|i| p1[i] + p2[i] + p3[i]).collect();
        let mk = |v| Field::from_raw(Arc::clone(grid), v);
        PressureDecomposition {
            p1: mk(p1),
            p2: mk(p2),
            p3: mk(p3),
            total: mk(total),
            gauge: Gauge::OuterZero,
            eps,
        }
    }
}

/// Two-sided probe `p(R + δ) - p(R - δ)` of each part and of the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasurement {
    pub t: f64,
    pub eps: f64,
    pub r_probe: f64,
    pub delta_probe: f64,
    pub value: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl JumpMeasurement {
    /// `p(R - δ) - p(R + δ)`, the inside-minus-outside orientation used by
    /// the Young-Laplace law.
    pub fn inside_minus_outside(&self) -> f64 {
        -self.value
    }
}

pub fn jump(dec: &PressureDecomposition, t: f64, r_probe: f64, delta_probe: f64) -> Result<JumpMeasurement> {
    let grid = dec.total.grid();
    let (lo, hi) = (r_probe - delta_probe, r_probe + delta_probe);
    if !(delta_probe > 0.0 && lo > grid.r_min() && hi < grid.r_max()) {
        return Err(invalid(format!(
            "probe points {lo} and {hi} must lie inside ({}, {})",
            grid.r_min(),
            grid.r_max()
        )));
    }
    let diff = |f: &Field| {
        let a = f.interpolate(hi).expect("checked above");
        let b = f.interpolate(lo).expect("checked above");
        a - b
    };
    Ok(JumpMeasurement {
        t,
        eps: dec.eps,
        r_probe,
        delta_probe,
        value: diff(&dec.total),
        p1: diff(&dec.p1),
        p2: diff(&dec.p2),
        p3: diff(&dec.p3),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationQuality {
    /// Successive differences shrink monotonically.
    Converging,
    /// Differences vanish; the series is constant.
    Exact,
    /// Differences do not shrink; the finest value is returned.
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub quality: ExtrapolationQuality,
    /// `log₂` of the ratio of the last two successive differences, when
    /// defined.
    pub observed_order: Option<f64>,
}

/// Polynomial (Richardson) extrapolation of `values` sampled at abscissae
/// `eps` to `eps = 0`, using Neville's scheme on all points.
pub fn richardson(eps: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if eps.len() != values.len() {
        return Err(invalid("abscissae and values differ in length"));
    }
    if eps.len() < 3 {
        return Err(invalid(format!("need at least 3 points, got {}", eps.len())));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(invalid("abscissae must be positive and strictly decreasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0, t: 0.0 });
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if diffs.iter().all(|d| d.abs() <= 1e-14 * scale) {
        return Ok(Extrapolation {
            value: *values.last().expect("non-empty"),
            quality: ExtrapolationQuality::Exact,
            observed_order: None,
        });
    }
    let k = diffs.len();
    let (d1, d2) = (diffs[k - 2], diffs[k - 1]);
    let observed_order = if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
        Some((d1 / d2).log2())
    } else {
        None
    };
    let monotone = diffs.windows(2).all(|w| w[0].signum() == w[1].signum() && w[1].abs() < w[0].abs());
    if !monotone {
        return Ok(Extrapolation {
            value: *values.last().expect("non-empty"),
            quality: ExtrapolationQuality::NonMonotone,
            observed_order,
        });
    }
    let mut p = values.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (eps[i + m] * p[i] - eps[i] * p[i + 1]) / (eps[i + m] - eps[i]);
        }
    }
    Ok(Extrapolation { value: p[0], quality: ExtrapolationQuality::Converging, observed_order })
}

/// Extrapolates the total jump of a series measured at fixed probe
/// position and half-width over decreasing `ε`.
pub fn jump_extrapolate(series: &[JumpMeasurement]) -> Result<Extrapolation> {
    jump_extrapolate_by(series, |m| m.value)
}

pub fn jump_extrapolate_by(series: &[JumpMeasurement], part: impl Fn(&JumpMeasurement) -> f64) -> Result<Extrapolation> {
    if let Some(first) = series.first() {
        if series.iter().any(|m| m.delta_probe != first.delta_probe || m.r_probe != first.r_probe) {
            return Err(invalid("series must share the probe position and half-width"));
        }
    }
    let eps: Vec<f64> = series.iter().map(|m| m.eps).collect();
    let vals: Vec<f64> = series.iter().map(part).collect();
    richardson(&eps, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{interface_radius, transport_solution, transport_solution_deriv};
    use crate::grid::{integrate, make_grid};
    use crate::physics::{MobilityExponent, Potential, Profile};
    use proptest::prelude::*;

    fn params(eps: f64) -> ModelParams {
        ModelParams {
            n_dim: 2,
            inflow_speed: 1.0,
            r0: 2.0,
            outer_radius: 5.0,
            viscosity: 1.0,
            density: 1.0,
            mobility_prefactor: 0.0,
            alpha: MobilityExponent::Infinity,
            eps,
        }
    }

    #[test]
    fn velocity_gradient_matches_finite_differences() {
        for n in [2u32, 3] {
            let p = ModelParams { n_dim: n, density: 1.3, viscosity: 0.7, inflow_speed: 1.6, ..params(0.1) };
            let u = |r: f64| crate::analytic::velocity(r, &p);
            let h = 1e-4;
            for i in 0..20 {
                let r = 1.2 + 0.18 * i as f64;
                let du = (u(r + h) - u(r - h)) / (2.0 * h);
                let d2u = (u(r + h) - 2.0 * u(r) + u(r - h)) / (h * h);
                let lap = d2u + f64::from(n - 1) * du / r;
                let fd = -p.density * u(r) * du + p.viscosity * lap;
                assert!((fd - velocity_pressure_gradient(r, &p)).abs() < 1e-5, "n={n} r={r}");
                let dp3 = (velocity_pressure(r + h, &p) - velocity_pressure(r - h, &p)) / (2.0 * h);
                assert!((dp3 - velocity_pressure_gradient(r, &p)).abs() < 1e-6);
            }
            assert_eq!(velocity_pressure(p.outer_radius, &p), 0.0);
        }
    }

    #[test]
    fn closed_form_p3_matches_quadrature() {
        let p = params(0.1);
        let g = make_grid(1.0, 5.0, 4000, 2).unwrap();
        let r = g.nodes();
        let h = g.h();
        let mut acc = 0.0;
        for i in (0..r.len() - 1).rev() {
            acc -= 0.5 * h * (velocity_pressure_gradient(r[i], &p) + velocity_pressure_gradient(r[i + 1], &p));
            assert!((acc - velocity_pressure(r[i], &p)).abs() < 1e-6);
        }
    }

    #[test]
    fn discrete_laplacian_of_velocity() {
        let p = params(0.1);
        let g = make_grid(1.0, 5.0, 800, 2).unwrap();
        let lap = discrete_velocity_laplacian(&g, &p);
        for (&r, &l) in g.nodes().iter().zip(lap.values()).skip(1).take(798) {
            let exact = p.inflow_speed * r.powi(-3);
            assert!((l - exact).abs() < 1e-4, "{r}");
        }
    }

    #[test]
    fn constant_field_has_only_velocity_pressure() {
        let g = make_grid(1.0, 5.0, 100, 2).unwrap();
        let p = params(0.1);
        let c = Field::constant(&g, 0.5);
        let dec = PressureDecomposition::decompose(&c, &p);
        assert!(dec.p1.values().iter().all(|&v| v == 0.0));
        assert!(dec.p2.values().iter().all(|&v| v == 0.0));
        let grad = pressure_gradient(&c, &p);
        for (&r, &v) in g.nodes().iter().zip(grad.values()) {
            assert_eq!(v, velocity_pressure_gradient(r, &p));
        }
    }

    #[test]
    fn total_gradient_is_consistent() {
        let pot = Potential::default();
        let prof = Profile::with_defaults(&pot);
        let p = params(0.2);
        let g = make_grid(1.0, 5.0, 2000, 2).unwrap();
        let c = g.sample(|r| transport_solution(r, 1.0, &p, &prof));
        let dec = PressureDecomposition::decompose(&c, &p);
        let lhs = deriv_r(&dec.total);
        let rhs = pressure_gradient(&c, &p);
        let scale = rhs.max_abs();
        for i in 2..g.len() - 2 {
            assert!((lhs.values()[i] - rhs.values()[i]).abs() < 2e-2 * scale, "node {i}");
        }
        // p1 is an antiderivative of its integrand
        let d1 = deriv_r(&dec.p1);
        let gr = deriv_r(&c);
        for i in 2..g.len() - 2 {
            let r = g.nodes()[i];
            let q = -p.eps * gr.values()[i].powi(2) / r;
            assert!((d1.values()[i] - q).abs() < 2e-2 * scale);
        }
    }

    #[test]
    fn p2_jump_vanishes_outside_layer() {
        let pot = Potential::default();
        let prof = Profile::with_defaults(&pot);
        let p = params(0.05);
        let g = make_grid(1.0, 5.0, 1600, 2).unwrap();
        let t = 3.0;
        let c = g.sample(|r| transport_solution(r, t, &p, &prof));
        let r = interface_radius(t, &p);
        let dec = PressureDecomposition::decompose(&c, &p);
        let j = jump(&dec, t, r, 0.25).unwrap();
        assert_eq!(j.p2, 0.0);
        assert!(j.inside_minus_outside() > 0.0);
        assert!(jump(&dec, t, r, 3.0).is_err());
    }

    #[test]
    fn analytic_gradient_path_agrees_with_numerical() {
        let pot = Potential::default();
        let prof = Profile::with_defaults(&pot);
        let p = params(0.05);
        let g = make_grid(1.0, 5.0, 3200, 2).unwrap();
        let t = 1.0;
        let c = g.sample(|r| transport_solution(r, t, &p, &prof));
        let gx = g.sample(|r| transport_solution_deriv(r, t, &p, &prof));
        let r = interface_radius(t, &p);
        let a = jump(&PressureDecomposition::decompose(&c, &p), t, r, 0.25).unwrap();
        let b = jump(&PressureDecomposition::from_gradient(&gx, &p), t, r, 0.25).unwrap();
        assert!((a.p1 - b.p1).abs() < 1e-2 * b.p1.abs(), "{} {}", a.p1, b.p1);
    }

    #[test]
    fn p3_jump_shrinks_with_probe_width() {
        let p = params(0.05);
        let g = make_grid(1.0, 5.0, 400, 2).unwrap();
        let dec = PressureDecomposition::decompose(&Field::constant(&g, 1.0), &p);
        let mut prev = f64::INFINITY;
        for k in 0..6 {
            let d = 0.4 / 2f64.powi(k);
            let j = jump(&dec, 0.0, 3.0, d).unwrap().p3.abs();
            assert!(j < prev);
            prev = j;
        }
        assert!(prev < 5e-3);
    }

    #[test]
    fn richardson_identities() {
        let e = [0.1, 0.05, 0.025];
        let x = richardson(&e, &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(x.value, 3.0);
        assert_eq!(x.quality, ExtrapolationQuality::Exact);
        let lin: Vec<f64> = e.iter().map(|&e| 1.7 + 0.9 * e).collect();
        let x = richardson(&e, &lin).unwrap();
        assert!((x.value - 1.7).abs() < 1e-10);
        assert_eq!(x.quality, ExtrapolationQuality::Converging);
        assert!((x.observed_order.unwrap() - 1.0).abs() < 1e-9);
        let quad: Vec<f64> = e.iter().map(|&e| 1.7 + 0.9 * e + 3.0 * e * e).collect();
        assert!((richardson(&e, &quad).unwrap().value - 1.7).abs() < 1e-10);
        let bad = richardson(&e, &[1.0, 2.0, 1.5]).unwrap();
        assert_eq!(bad.quality, ExtrapolationQuality::NonMonotone);
        assert_eq!(bad.value, 1.5);
        assert!(richardson(&e[..2], &[1.0, 2.0]).is_err());
        assert!(richardson(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn additivity_and_jump_linearity(coefs in proptest::collection::vec(-1.0f64..1.0, 6), eps in 0.02f64..0.3, rp in 1.6f64..4.4, dp in 0.05f64..0.5) {
            let p = params(eps);
            let g = make_grid(1.0, 5.0, 300, 2).unwrap();
            let c = g.sample(|r| coefs.iter().enumerate().map(|(k, a)| a * (k as f64 * r).sin()).sum());
            let dec = PressureDecomposition::decompose(&c, &p);
            for i in 0..g.len() {
                let s = dec.p1.values()[i] + dec.p2.values()[i] + dec.p3.values()[i];
                prop_assert!((dec.total.values()[i] - s).abs() <= 1e-14 * (1.0 + s.abs()));
            }
            let j = jump(&dec, 0.0, rp, dp).unwrap();
            let s = j.p1 + j.p2 + j.p3;
            let scale = 1.0 + j.p1.abs() + j.p2.abs() + j.p3.abs();
            prop_assert!((j.value - s).abs() <= 1e-13 * scale);
            prop_assert!(integrate(&dec.p2) <= 0.0);
        }
    }
}
