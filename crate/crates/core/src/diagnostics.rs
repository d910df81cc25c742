//! Energy, discrepancy and deviation functionals of a phase field.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{deriv_r, integrate, Field};
use crate::physics::{ModelParams, Potential};

/// `∫ (ε |∂_r c|²/2 + f(c)/ε) r^{n-1} dr`.
pub fn energy(c: &Field, params: &ModelParams, pot: &Potential) -> f64 {
    let eps = params.eps;
    let g = deriv_r(c);
    let e = c.zip_with(&g, |v, d| 0.5 * eps * d * d + pot.f(v) / eps).expect("same grid");
    integrate(&e)
}

/// Nodal `ξ = ε |∂_r c|²/2 - f(c)/ε`.
pub fn discrepancy(c: &Field, params: &ModelParams, pot: &Potential) -> Field {
    let eps = params.eps;
    let g = deriv_r(c);
    c.zip_with(&g, |v, d| 0.5 * eps * d * d - pot.f(v) / eps).expect("same grid")
}

/// `∫ ξ⁺ r^{n-1} dr`.
pub fn discrepancy_positive_part(c: &Field, params: &ModelParams, pot: &Potential) -> f64 {
    integrate(&discrepancy(c, params, pot).map(|x| x.max(0.0)))
}

/// `∫ ξ φ r^{n-1} dr`.
pub fn pairing(c: &Field, params: &ModelParams, pot: &Potential, phi: impl Fn(f64) -> f64) -> f64 {
    integrate(&discrepancy(c, params, pot).map_with_r(|r, x| x * phi(r)))
}

/// `∫ sqrt(2 f̃(c)) |∂_r c| r^{n-1} dr`, the total variation of `W(c)`.
pub fn bv_seminorm(c: &Field, pot: &Potential) -> f64 {
    let g = deriv_r(c);
    let d = c
        .zip_with(&g, |v, dv| (2.0 * pot.truncated(v)).sqrt() * dv.abs())
        .expect("same grid");
    integrate(&d)
}

/// Zero crossing of `c`, linearly interpolated. Exact zeros at nodes count
/// as the crossing itself.
pub fn locate_interface(c: &Field) -> Result<f64> {
    let v = c.values();
    let r = c.grid().nodes();
    let signed: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    let changes: Vec<(usize, usize)> = signed
        .windows(2)
        .filter(|w| v[w[0]].signum() != v[w[1]].signum())
        .map(|w| (w[0], w[1]))
        .collect();
    match changes.len() {
        0 => Err(Error::NoCrossing),
        1 => {
            let (i, j) = changes[0];
            if j > i + 1 {
                // zeros in between; take the middle of the zero run
                Ok(0.5 * (r[i + 1] + r[j - 1]))
            } else {
                Ok(r[i] + (r[j] - r[i]) * v[i] / (v[i] - v[j]))
            }
        }
        k => Err(Error::MultipleCrossings(k)),
    }
}

/// Norms of `d = c_solver - c_oracle`: `‖d‖_{L²(r^{n-1}dr)}` and
/// `ε ‖∂_r d‖²_{L²(r^{n-1}dr)}`.
pub fn deviation(c_solver: &Field, c_oracle: &Field, params: &ModelParams) -> Result<(f64, f64)> {
    let d = c_solver.zip_with(c_oracle, |a, b| a - b)?;
    let l2 = integrate(&d.map(|x| x * x)).sqrt();
    let h1 = params.eps * integrate(&deriv_r(&d).map(|x| x * x));
    Ok((l2, h1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub abscissae: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln` units.
    pub residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Least-squares fit of `ln y = intercept + slope · ln x`.
pub fn scaling_fit(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 3 {
        return Err(invalid(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid(format!("scaling fit needs positive finite data, got ({x}, {y})")));
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("scaling fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        abscissae: pairs.iter().map(|p| p.0).collect(),
        ordinates: pairs.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        residual,
    })
}

/// `max_{s≠t} ‖c(t) - c(s)‖_{L²} / |t - s|^γ` over snapshot pairs.
pub fn holder_seminorm(snapshots: &[(f64, &Field)], exponent: f64) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(invalid("need at least 2 snapshots"));
    }
    let mut best = 0.0f64;
    for (i, (t, a)) in snapshots.iter().enumerate() {
        for (s, b) in &snapshots[i + 1..] {
            let dt = (t - s).abs();
            if dt == 0.0 {
                continue;
            }
            let d = integrate(&a.zip_with(b, |x, y| (x - y) * (x - y))?).sqrt();
            best = best.max(d / dt.powf(exponent));
        }
    }
    Ok(best)
}

/// Named test function paired against `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingValue {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub discrepancy_pos: f64,
    pub discrepancy_pairing: Vec<PairingValue>,
    pub bv_seminorm: f64,
    /// `None` when `c` has no single zero crossing.
    pub interface_radius: Option<f64>,
    pub mass: f64,
    pub linf_c: f64,
}

impl DiagnosticsRecord {
    pub fn measure(
        t: f64,
        c: &Field,
        params: &ModelParams,
        pot: &Potential,
        tests: &[(String, &dyn Fn(f64) -> f64)],
    ) -> Self {
        DiagnosticsRecord {
            t,
            energy: energy(c, params, pot),
            discrepancy_pos: discrepancy_positive_part(c, params, pot),
            discrepancy_pairing: tests
                .iter()
                .map(|(id, phi)| PairingValue { id: id.clone(), value: pairing(c, params, pot, phi) })
                .collect(),
            bv_seminorm: bv_seminorm(c, pot),
            interface_radius: locate_interface(c).ok(),
            mass: integrate(c),
            linf_c: c.max_abs(),
        }
    }
}

/// Smooth bump `exp(1 - 1/(1 - ((r - center)/half_width)²))` with value 1
/// at the centre and support `|r - center| < half_width`.
pub fn bump(center: f64, half_width: f64) -> impl Fn(f64) -> f64 {
    move |r: f64| {
        let x = (r - center) / half_width;
        let q = 1.0 - x * x;
        if q <= 0.0 {
            0.0
        } else {
            (1.0 - 1.0 / q).exp()
        }
    }
}
