//! Closed-form objects of the zero-mobility problem: the prescribed velocity,
//! the interface radius, the transported profile and the reference
//! pressure-jump laws.

use serde::{Deserialize, Serialize};

use crate::physics::{ModelParams, Profile};

/// Interface radius and the derived geometric factors at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceState {
    pub t: f64,
    /// `R(t) = (r₀ⁿ + n a t)^{1/n}`.
    pub radius: f64,
    /// Scalar mean curvature `(n-1)/R`.
    pub mean_curvature: f64,
    /// Amplification `κ(t) = (R/r₀)^{2n-2}`.
    pub kappa: f64,
    /// Layer compression `J(t) = (R/r₀)^{n-1}`, the Jacobian `dρ/dr` of the
    /// characteristic foot map at the interface.
    pub compression: f64,
}

/// `u(r) = a r^{1-n}`.
pub fn velocity(r: f64, params: &ModelParams) -> f64 {
    params.inflow_speed * r.powi(1 - params.n_dim as i32)
}

/// `∂_r u = a (1-n) r^{-n}`.
pub fn velocity_deriv(r: f64, params: &ModelParams) -> f64 {
    let n = params.n_dim as i32;
    params.inflow_speed * f64::from(1 - n) * r.powi(-n)
}

pub fn interface_radius(t: f64, params: &ModelParams) -> f64 {
    let n = params.n_dim as i32;
    (params.r0.powi(n) + f64::from(n) * params.inflow_speed * t).powf(1.0 / f64::from(n))
}

pub fn interface_state(t: f64, params: &ModelParams) -> InterfaceState {
    let n = params.n_dim as i32;
    let radius = interface_radius(t, params);
    let stretch = radius / params.r0;
    InterfaceState {
        t,
        radius,
        mean_curvature: f64::from(n - 1) / radius,
        kappa: stretch.powi(2 * n - 2),
        compression: stretch.powi(n - 1),
    }
}

/// Foot of the characteristic through `(r, t)` at time zero, if it lies in
/// the domain: `(rⁿ - n a t)^{1/n}`.
pub fn characteristic_foot(r: f64, t: f64, params: &ModelParams) -> Option<f64> {
    let n = params.n_dim as i32;
    let x = r.powi(n) - f64::from(n) * params.inflow_speed * t;
    if x >= 0.0 {
        Some(x.powf(1.0 / f64::from(n)))
    } else {
        None
    }
}

/// The zero-mobility solution obtained by the method of characteristics.
///
/// Points whose characteristic started inside the inflow boundary carry the
/// boundary value `1`. The branch point `rⁿ = n a t` belongs to the first
/// branch.
pub fn transport_solution(r: f64, t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    match characteristic_foot(r, t, params) {
        Some(rho) => prof.theta((rho - params.r0) / params.eps),
        None => 1.0,
    }
}

/// `∂_r` of [`transport_solution`]: `θ'(s) r^{n-1} ρ^{1-n} / ε` with
/// `ρ = (rⁿ - n a t)^{1/n}` and `s = (ρ - r₀)/ε`. Zero on the second branch.
pub fn transport_solution_deriv(r: f64, t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    let n = params.n_dim as i32;
    match characteristic_foot(r, t, params) {
        Some(rho) if rho > 0.0 => {
            let s = (rho - params.r0) / params.eps;
            prof.theta_deriv(s) * (r / rho).powi(n - 1) / params.eps
        }
        _ => 0.0,
    }
}

/// Amplified jump law `σ κ(t) (n-1)/R(t)` with `σ = ∫|θ'|²`.
pub fn limit_jump(t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    let st = interface_state(t, params);
    prof.sigma_profile() * st.kappa * st.mean_curvature
}

/// Classical Young-Laplace jump `σ (n-1)/R(t)` for a given surface tension.
pub fn young_laplace_jump(t: f64, params: &ModelParams, sigma: f64) -> f64 {
    sigma * interface_state(t, params).mean_curvature
}

/// Amplitude `σ κ(t) - σ̃` of the limiting discrepancy measure on the sphere.
pub fn xi_limit_amplitude(t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    prof.sigma_profile() * interface_state(t, params).kappa - prof.sigma_tilde()
}

/// Jump of `p₁` obtained by changing variables `s = (ρ(r) - r₀)/ε` in
/// `∫ ε (n-1)/r |∂_r c|² dr`: the layer Jacobian `ds/dr = J/ε` leaves a single
/// power of `J`, giving `σ J(t) (n-1)/R(t)`.
pub fn compressed_layer_jump(t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    let st = interface_state(t, params);
    prof.sigma_profile() * st.compression * st.mean_curvature
}

/// Limit of `∫ ξ_ε φ r^{n-1} dr / (R^{n-1} φ(R))` for the transported profile,
/// by the same change of variables: `σ J / 2 - σ̃ / J`.
pub fn compressed_layer_xi_amplitude(t: f64, params: &ModelParams, prof: &Profile) -> f64 {
    let j = interface_state(t, params).compression;
    0.5 * prof.sigma_profile() * j - prof.sigma_tilde() / j
}

/// Surface area of the unit sphere in ℝⁿ.
pub fn unit_sphere_area(n_dim: u32) -> f64 {
    match n_dim {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("unsupported dimension {n_dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{MobilityExponent, Potential};

    fn params() -> ModelParams {
        ModelParams {
            n_dim: 2,
            inflow_speed: 1.0,
            r0: 2.0,
            outer_radius: 5.0,
            viscosity: 1.0,
            density: 1.0,
            mobility_prefactor: 0.0,
            alpha: MobilityExponent::Infinity,
            eps: 0.4,
        }
    }

    fn profile() -> Profile {
        Profile::with_defaults(&Potential::default())
    }

    #[test]
    fn velocity_values() {
        let p = ModelParams { inflow_speed: 1.7, ..params() };
        assert_eq!(velocity(1.0, &p), 1.7);
        assert!((velocity(5.0, &p) - 1.7 / 5.0).abs() < 1e-15);
        for n in [2, 3] {
            let p = ModelParams { n_dim: n, ..p };
            for i in 0..20 {
                let r = 1.0 + 0.2 * i as f64;
                assert!((r.powi(n as i32 - 1) * velocity(r, &p) - 1.7).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interface_state_values() {
        let st = interface_state(3.0, &params());
        assert!((st.radius - 10f64.sqrt()).abs() < 1e-14);
        assert!((st.kappa - 2.5).abs() < 1e-14);
        assert!((st.compression - 2.5f64.sqrt()).abs() < 1e-14);
        let st0 = interface_state(0.0, &params());
        assert_eq!(st0.radius, 2.0);
        assert_eq!(st0.kappa, 1.0);
    }

    #[test]
    fn radius_identity_and_monotonicity() {
        for n in [2u32, 3] {
            let p = ModelParams { n_dim: n, ..params() };
            let mut prev = 0.0;
            for i in 0..50 {
                let t = 0.1 * i as f64;
                let r = interface_radius(t, &p);
                let lhs = r.powi(n as i32) - f64::from(n) * t;
                assert!((lhs - 2f64.powi(n as i32)).abs() < 1e-12);
                assert!(r > prev);
                prev = r;
                let st = interface_state(t, &p);
                assert!(st.kappa >= 1.0);
                assert_eq!(st.kappa == 1.0, t == 0.0);
            }
        }
    }

    #[test]
    fn transport_solution_branches() {
        let p = params();
        let prof = profile();
        assert_eq!(transport_solution(1.5, 3.0, &p, &prof), 1.0);
        // s = (√10 - 2)/0.4 ≈ 2.906 > δ
        assert_eq!(transport_solution(4.0, 3.0, &p, &prof), -1.0);
        for i in 0..40 {
            let r = 1.0 + 0.1 * i as f64;
            let direct = prof.theta((r - 2.0) / 0.4);
            assert_eq!(transport_solution(r, 0.0, &p, &prof), direct);
        }
    }

    #[test]
    fn constant_along_characteristics() {
        let p = ModelParams { eps: 0.1, ..params() };
        let prof = profile();
        for n in [2u32, 3] {
            let p = ModelParams { n_dim: n, ..p };
            for i in 0..30 {
                let r = 1.5 + 0.05 * i as f64;
                for &(t, s) in &[(0.2, 0.3), (1.0, 0.5), (0.0, 1.0)] {
                    let n_i = n as i32;
                    let r_later = (r.powi(n_i) + f64::from(n) * s).powf(1.0 / f64::from(n));
                    let a = transport_solution(r, t, &p, &prof);
                    let b = transport_solution(r_later, t + s, &p, &prof);
                    assert!((a - b).abs() < 1e-12, "n={n} r={r} t={t}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn zero_at_interface_and_bounded_monotone() {
        let p = ModelParams { eps: 0.1, ..params() };
        let prof = profile();
        for i in 0..20 {
            let t = 0.2 * i as f64;
            let r = interface_radius(t, &p);
            assert!(transport_solution(r, t, &p, &prof).abs() < 1e-12);
            let mut prev = 1.0;
            for k in 0..=800 {
                let r = 1.0 + 4.0 * k as f64 / 800.0;
                let c = transport_solution(r, t, &p, &prof);
                assert!((-1.0..=1.0).contains(&c));
                assert!(c <= prev + 1e-15);
                prev = c;
            }
        }
    }

    #[test]
    fn derivative_at_interface_and_far_field() {
        let p = ModelParams { eps: 0.1, ..params() };
        let prof = profile();
        let t = 1.3;
        let st = interface_state(t, &p);
        let at_r = transport_solution_deriv(st.radius, t, &p, &prof);
        let expected_mag = prof.theta_deriv(0.0).abs() / p.eps * st.compression;
        assert!((at_r.abs() - expected_mag).abs() < 1e-10 * expected_mag);
        assert!(at_r < 0.0);
        assert_eq!(transport_solution_deriv(4.5, t, &p, &prof), 0.0);
        assert_eq!(transport_solution_deriv(1.2, t, &p, &prof), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = ModelParams { eps: 0.1, ..params() };
        let prof = profile();
        let t = 2.0;
        let r_c = interface_radius(t, &p);
        let err = |h: f64| {
            (0..40)
                .map(|k| r_c - 0.04 + 0.002 * k as f64)
                .map(|r| {
                    let fd = (transport_solution(r + h, t, &p, &prof)
                        - transport_solution(r - h, t, &p, &prof))
                        / (2.0 * h);
                    (fd - transport_solution_deriv(r, t, &p, &prof)).abs()
                })
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 1.0, "{e1}");
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn jump_laws() {
        let p = params();
        let prof = profile();
        let sigma = prof.sigma_profile();
        assert!((limit_jump(0.0, &p, &prof) - young_laplace_jump(0.0, &p, sigma)).abs() < 1e-14);
        let expected = sigma * 2.5 / 10f64.sqrt();
        assert!((limit_jump(3.0, &p, &prof) - expected).abs() < 1e-13);
        assert!((expected / sigma - 0.790_569_415).abs() < 1e-9);
        for i in 0..10 {
            let t = 0.7 * i as f64;
            let ratio = limit_jump(t, &p, &prof) / young_laplace_jump(t, &p, sigma);
            assert!((ratio - interface_state(t, &p).kappa).abs() < 1e-13);
        }
    }

    #[test]
    fn xi_amplitude() {
        let p = params();
        let prof = profile();
        let a3 = xi_limit_amplitude(3.0, &p, &prof);
        assert!((a3 - (2.5 * prof.sigma_profile() - prof.sigma_tilde())).abs() < 1e-13);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..30 {
            let a = xi_limit_amplitude(i as f64, &p, &prof);
            assert!(a > prev);
            prev = a;
        }
    }
}
