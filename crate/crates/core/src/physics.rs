//! Model constants, the double-well potential and the transition profile.

use std::fmt;
use std::sync::Arc;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::grid::{Field, RadialGrid};
use crate::quadrature::{adaptive_simpson, gauss_legendre};

/// Exponent `α` in the mobility `m̃ ε^α`; `Infinity` means zero mobility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobilityExponent {
    Finite(f64),
    Infinity,
}

impl MobilityExponent {
    pub fn is_infinite(self) -> bool {
        matches!(self, MobilityExponent::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            MobilityExponent::Finite(a) => Some(a),
            MobilityExponent::Infinity => None,
        }
    }
}

impl fmt::Display for MobilityExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MobilityExponent::Finite(a) => write!(f, "{a}"),
            MobilityExponent::Infinity => f.write_str("infinity"),
        }
    }
}

impl Serialize for MobilityExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MobilityExponent::Finite(a) => s.serialize_f64(*a),
            MobilityExponent::Infinity => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for MobilityExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;
        impl Visitor<'_> for ExpVisitor {
            type Value = MobilityExponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or \"infinity\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(MobilityExponent::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(MobilityExponent::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(MobilityExponent::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v.to_ascii_lowercase().as_str() {
                    "infinity" | "inf" => Ok(MobilityExponent::Infinity),
                    other => Err(E::custom(format!("unknown mobility exponent {other:?}"))),
                }
            }
        }
        d.deserialize_any(ExpVisitor)
    }
}

/// Physical and scaling constants of one run. Missing fields deserialize to
/// the [`Default`] values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub n_dim: u32,
    /// Inflow speed `a`; the velocity is `a r^{1-n}`.
    #[serde(alias = "a")]
    pub inflow_speed: f64,
    /// Initial interface radius `r₀`.
    pub r0: f64,
    /// Outer radius `M` of the annulus `1 < r < M`.
    #[serde(alias = "M")]
    pub outer_radius: f64,
    #[serde(alias = "nu")]
    pub viscosity: f64,
    #[serde(alias = "rho")]
    pub density: f64,
    /// Mobility prefactor `m̃`.
    #[serde(alias = "m_tilde")]
    pub mobility_prefactor: f64,
    pub alpha: MobilityExponent,
    pub eps: f64,
}

impl Default for ModelParams {
    /// `n = 2`, `a = 1`, `r₀ = 2`, `M = 5`, `ν = ρ = 1`, `m̃ = 1`, `α = ∞`,
    /// `ε = 0.1`.
    fn default() -> Self {
        ModelParams {
            n_dim: 2,
            inflow_speed: 1.0,
            r0: 2.0,
            outer_radius: 5.0,
            viscosity: 1.0,
            density: 1.0,
            mobility_prefactor: 1.0,
            alpha: MobilityExponent::Infinity,
            eps: 0.1,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_dim == 2 || self.n_dim == 3) {
            return Err(invalid(format!("n_dim must be 2 or 3, got {}", self.n_dim)));
        }
        if !(self.r0 > 1.0 && self.outer_radius > self.r0) {
            return Err(invalid(format!(
                "need 1 < r0 < M, got r0 = {}, M = {}",
                self.r0, self.outer_radius
            )));
        }
        if !(self.inflow_speed.is_finite() && self.inflow_speed >= 0.0) {
            return Err(invalid(format!("inflow speed must be >= 0, got {}", self.inflow_speed)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.viscosity > 0.0 && self.density > 0.0) {
            return Err(invalid("viscosity and density must be positive"));
        }
        if !(self.mobility_prefactor.is_finite() && self.mobility_prefactor >= 0.0) {
            return Err(invalid(format!(
                "mobility prefactor must be finite and >= 0, got {}",
                self.mobility_prefactor
            )));
        }
        if let MobilityExponent::Finite(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(format!("mobility exponent must be >= 0, got {a}")));
            }
        }
        let m = self.mobility();
        if !(m.is_finite() && m >= 0.0) {
            return Err(invalid(format!("mobility m̃ ε^α = {m} is not finite and non-negative")));
        }
        Ok(())
    }

    /// `m̃ ε^α`, or `0` when the exponent is infinite.
    pub fn mobility(&self) -> f64 {
        match self.alpha {
            MobilityExponent::Finite(a) => self.mobility_prefactor * self.eps.powf(a),
            MobilityExponent::Infinity => 0.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_alpha(mut self, alpha: MobilityExponent) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Double-well potential family. Only the quartic member ships.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Potential {
    /// `scale · (1 - c²)² / 8`.
    Quartic {
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for Potential {
    fn default() -> Self {
        Potential::Quartic { scale: 1.0 }
    }
}

impl Potential {
    pub fn f(&self, c: f64) -> f64 {
        match *self {
            Potential::Quartic { scale } => {
                let q = 1.0 - c * c;
                scale * q * q / 8.0
            }
        }
    }

    pub fn df(&self, c: f64) -> f64 {
        match *self {
            Potential::Quartic { scale } => scale * 0.5 * c * (c * c - 1.0),
        }
    }

    pub fn d2f(&self, c: f64) -> f64 {
        match *self {
            Potential::Quartic { scale } => scale * 0.5 * (3.0 * c * c - 1.0),
        }
    }

    /// `(f, f', f'')` at `c`.
    pub fn eval(&self, c: f64) -> (f64, f64, f64) {
        (self.f(c), self.df(c), self.d2f(c))
    }

    /// Growth exponent `p` with `f(c) ~ |c|^p` at infinity.
    pub fn growth_exponent(&self) -> u32 {
        match self {
            Potential::Quartic { .. } => 4,
        }
    }

    /// `min(f(s), 1 + s²)`.
    pub fn truncated(&self, s: f64) -> f64 {
        self.f(s).min(1.0 + s * s)
    }

    /// `max f''` over `|c| <= bound`.
    pub fn max_curvature(&self, bound: f64) -> f64 {
        match self {
            Potential::Quartic { .. } => self.d2f(bound).max(self.d2f(0.0)),
        }
    }

    /// `∫_{-1}^{1} sqrt(f(s)/2) ds`.
    pub fn canonical_sigma(&self) -> f64 {
        gauss_legendre(|s| (self.f(s) / 2.0).sqrt(), -1.0, 1.0, 16)
    }

    /// `W(c) = ∫_{-1}^{c} sqrt(2 f̃(s)) ds`.
    pub fn w_of_c(&self, c: f64) -> f64 {
        let integrand = |s: f64| (2.0 * self.truncated(s)).sqrt();
        adaptive_simpson(&integrand, -1.0, c, 1e-13)
    }
}

/// Smooth non-increasing transition `θ` with `θ = 1` for `s <= -δ`,
/// `θ = -1` for `s >= δ` and `θ(0) = 0`.
///
/// `θ(s) = 1 - 2 Φ(s) / Φ(δ)` with `Φ(s) = ∫_{-δ}^{s} exp(-δ²/(δ² - τ²)) dτ`.
/// `Φ` is tabulated on `[-δ, 0]` and interpolated with cubic Hermite
/// polynomials using the exact bump as slope data; the right half follows from
/// oddness.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    delta: f64,
    intervals: usize,
    half_mass: f64,
    table: Vec<f64>,
    sigma_profile: f64,
    sigma_tilde: f64,
}

impl Profile {
    pub const DEFAULT_DELTA: f64 = 0.5;
    pub const DEFAULT_INTERVALS: usize = 2048;

    pub fn new(delta: f64, intervals: usize, potential: &Potential) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("profile half-width must be positive, got {delta}")));
        }
        if intervals < 16 {
            return Err(invalid(format!("need at least 16 tabulation intervals, got {intervals}")));
        }
        let ds = delta / intervals as f64;
        let bump = |s: f64| bump(delta, s);
        let mut table = Vec::with_capacity(intervals + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 0..intervals {
            let lo = -delta + k as f64 * ds;
            acc += gauss_legendre(bump, lo, lo + ds, 1);
            table.push(acc);
        }
        let mut prof = Self {
            delta,
            intervals,
            half_mass: acc,
            table,
            sigma_profile: 0.0,
            sigma_tilde: 0.0,
        };
        let scale = 1.0 / prof.half_mass;
        // θ' = -bump / Φ(0) since Φ(δ) = 2 Φ(0).
        prof.sigma_profile =
            2.0 * gauss_legendre(|s| (bump(s) * scale).powi(2), -delta, 0.0, 256);
        prof.sigma_tilde =
            2.0 * gauss_legendre(|s| potential.f(prof.theta(s)), -delta, 0.0, 256);
        Ok(prof)
    }

    pub fn with_defaults(potential: &Potential) -> Self {
        Self::new(Self::DEFAULT_DELTA, Self::DEFAULT_INTERVALS, potential)
            .expect("default profile parameters are valid")
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// `σ = ∫ |θ'|² ds`.
    pub fn sigma_profile(&self) -> f64 {
        self.sigma_profile
    }

    /// `σ̃ = ∫ f(θ(s)) ds`.
    pub fn sigma_tilde(&self) -> f64 {
        self.sigma_tilde
    }

    pub fn theta(&self, s: f64) -> f64 {
        if s <= -self.delta {
            return 1.0;
        }
        if s >= self.delta {
            return -1.0;
        }
        if s == 0.0 {
            return 0.0;
        }
        if s > 0.0 {
            return -self.theta(-s);
        }
        // s in (-δ, 0]
        1.0 - self.phi(s) / self.half_mass
    }

    pub fn theta_deriv(&self, s: f64) -> f64 {
        -bump(self.delta, s) / self.half_mass
    }

    fn phi(&self, s: f64) -> f64 {
        let ds = self.delta / self.intervals as f64;
        let x = (s + self.delta) / ds;
        let k = (x.floor() as usize).min(self.intervals - 1);
        let s0 = -self.delta + k as f64 * ds;
        let t = (s - s0) / ds;
        let (p0, p1) = (self.table[k], self.table[k + 1]);
        let (m0, m1) = (bump(self.delta, s0) * ds, bump(self.delta, s0 + ds) * ds);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }
}

fn bump(delta: f64, s: f64) -> f64 {
    let d2 = delta * delta;
    let q = d2 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (-d2 / q).exp()
    }
}

pub fn profile_eval(prof: &Profile, s: f64) -> f64 {
    prof.theta(s)
}

pub fn profile_deriv(prof: &Profile, s: f64) -> f64 {
    prof.theta_deriv(s)
}

/// `c₀(r) = θ((r - r₀)/ε)` on the grid.
pub fn initial_condition(grid: &Arc<RadialGrid>, params: &ModelParams, prof: &Profile) -> Result<Field> {
    let half = prof.delta() * params.eps;
    let room = (params.r0 - grid.r_min()).min(grid.r_max() - params.r0);
    if half >= room {
        return Err(invalid(format!(
            "transition layer [r0 - δε, r0 + δε] = [{}, {}] touches the boundary",
            params.r0 - half,
            params.r0 + half
        )));
    }
    Ok(grid.sample(|r| prof.theta((r - params.r0) / params.eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn quartic() -> Potential {
        Potential::default()
    }

    #[test]
    fn potential_values() {
        let p = quartic();
        assert_eq!(p.eval(1.0), (0.0, 0.0, 1.0));
        assert_eq!(p.eval(-1.0).0, 0.0);
        assert_eq!(p.eval(-1.0).1, 0.0);
        assert_eq!(p.f(0.0), 0.125);
        assert_eq!(p.df(0.0), 0.0);
        assert_eq!(p.growth_exponent(), 4);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = quartic();
        let h = 1e-5;
        for i in 0..41 {
            let c = -2.0 + 0.1 * i as f64;
            let fd1 = (p.f(c + h) - p.f(c - h)) / (2.0 * h);
            let fd2 = (p.df(c + h) - p.df(c - h)) / (2.0 * h);
            assert!((fd1 - p.df(c)).abs() < 1e-8);
            assert!((fd2 - p.d2f(c)).abs() < 1e-8);
        }
    }

    #[test]
    fn quadratic_lower_bound_and_growth() {
        let p = quartic();
        let c_fit = (0..=600)
            .map(|i| -3.0 + 0.01 * i as f64)
            .filter(|s: &f64| (s.abs() - 1.0).abs() > 1e-9)
            .map(|s| p.f(s) / (s.abs() - 1.0).powi(2))
            .fold(f64::INFINITY, f64::min);
        assert!(c_fit >= 0.125 - 1e-12, "fitted constant {c_fit}");
        let c0 = 0.1;
        for i in 0..=400 {
            let c = 1.0 - c0 + 0.01 * i as f64;
            for c in [c, -c] {
                assert!(p.d2f(c) >= c0 * c.abs().powi(2));
            }
        }
    }

    #[test]
    fn canonical_sigma_of_quartic() {
        // ∫_{-1}^{1} (1 - s²)/4 ds = 1/3
        assert!((quartic().canonical_sigma() - 1.0 / 3.0).abs() < 1e-14);
        let four = Potential::Quartic { scale: 4.0 };
        assert!((four.canonical_sigma() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn w_of_c_endpoints_and_monotonicity() {
        let p = quartic();
        assert_eq!(p.w_of_c(-1.0), 0.0);
        assert!((p.w_of_c(1.0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.w_of_c(1.0) - 2.0 * p.canonical_sigma()).abs() < 1e-12);
        let samples: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
        let w: Vec<f64> = samples.iter().map(|&c| p.w_of_c(c)).collect();
        assert!(w.windows(2).all(|x| x[1] >= x[0]));
        // |W(c0) - W(c1)| >= C0 |c0 - c1|² with a positive fitted constant
        let mut c0_fit = f64::INFINITY;
        for i in 0..samples.len() {
            for j in 0..i {
                let d = samples[i] - samples[j];
                c0_fit = c0_fit.min((w[i] - w[j]).abs() / (d * d));
            }
        }
        assert!(c0_fit > 1e-3, "fitted C0 = {c0_fit}");
    }

    #[test]
    fn profile_shape() {
        let prof = Profile::with_defaults(&quartic());
        let d = prof.delta();
        assert_eq!(prof.theta(-2.0 * d), 1.0);
        assert_eq!(prof.theta(2.0 * d), -1.0);
        assert_eq!(prof.theta(0.0), 0.0);
        assert_eq!(prof.theta_deriv(0.75), 0.0);
        assert_eq!(prof.theta_deriv(-0.75), 0.0);
        let mut prev = 1.0;
        for i in 0..=4000 {
            let s = -0.6 + 1.2 * i as f64 / 4000.0;
            let t = prof.theta(s);
            assert!(t <= prev + 1e-15, "not monotone at {s}");
            assert!(prof.theta_deriv(s) <= 0.0);
            assert!((t + prof.theta(-s)).abs() < 1e-15);
            prev = t;
        }
        assert!(prof.sigma_profile() > 0.0 && prof.sigma_tilde() > 0.0);
    }

    #[test]
    fn theta_matches_its_derivative() {
        let prof = Profile::with_defaults(&quartic());
        let h = 1e-6;
        for i in 1..100 {
            let s = -0.5 + i as f64 / 100.0;
            let fd = (prof.theta(s + h) - prof.theta(s - h)) / (2.0 * h);
            assert!((fd - prof.theta_deriv(s)).abs() < 1e-6, "s = {s}");
        }
    }

    #[test]
    fn sigma_profile_matches_fine_trapezoid() {
        let prof = Profile::with_defaults(&quartic());
        let n = 400_000;
        let d = prof.delta();
        let ds = 2.0 * d / n as f64;
        let oracle: f64 = (0..=n)
            .map(|k| prof.theta_deriv(-d + k as f64 * ds).powi(2) * ds)
            .sum();
        assert!((oracle - prof.sigma_profile()).abs() < 1e-8 * oracle);
    }

    #[test]
    fn constants_are_insensitive_to_tabulation() {
        let p = quartic();
        let a = Profile::new(0.5, 1024, &p).unwrap();
        let b = Profile::new(0.5, 2048, &p).unwrap();
        assert!((a.sigma_profile() - b.sigma_profile()).abs() < 1e-8);
        assert!((a.sigma_tilde() - b.sigma_tilde()).abs() < 1e-8);
    }

    #[test]
    fn initial_condition_layer() {
        let p = quartic();
        let prof = Profile::with_defaults(&p);
        let params = ModelParams {
            n_dim: 2,
            inflow_speed: 1.0,
            r0: 2.0,
            outer_radius: 5.0,
            viscosity: 1.0,
            density: 1.0,
            mobility_prefactor: 0.0,
            alpha: MobilityExponent::Infinity,
            eps: 0.1,
        };
        let g = make_grid(1.0, 5.0, 400, 2).unwrap();
        let c = initial_condition(&g, &params, &prof).unwrap();
        for (&r, &v) in g.nodes().iter().zip(c.values()) {
            if r <= 2.0 - 0.05 {
                assert_eq!(v, 1.0);
            }
            if r >= 2.0 + 0.05 {
                assert_eq!(v, -1.0);
            }
        }
        assert_eq!(c.values()[100], 0.0);
        let wide = ModelParams { eps: 1.0, r0: 1.3, ..params };
        assert!(initial_condition(&g, &wide, &prof).is_err());
    }

    #[test]
    fn exponent_serde() {
        let v: MobilityExponent = serde_json::from_str("\"infinity\"").unwrap();
        assert_eq!(v, MobilityExponent::Infinity);
        let v: MobilityExponent = serde_json::from_str("4").unwrap();
        assert_eq!(v, MobilityExponent::Finite(4.0));
        assert_eq!(serde_json::to_string(&MobilityExponent::Infinity).unwrap(), "\"infinity\"");
    }
}
