//! Uniform radial mesh on `[r_min, r_max]` with the measure `r^{n-1} dr`.
//!
//! Node `i` sits at `r_min + i h`. Every node owns the control volume
//! `[r_i - h/2, r_i + h/2]` clipped to the domain, and its quadrature weight
//! is the exact integral of `r^{n-1}` over that volume. Faces sit half-way
//! between nodes and carry the coefficient `r_{i+1/2}^{n-1}`.
//!
//! With these choices the flux-form radial Laplacian satisfies an exact
//! summation-by-parts identity against the quadrature:
//!
//! ```text
//! sum_i w_i f_i (Lap g)_i = - sum_faces A_{i+1/2} (f_{i+1} - f_i)(g_{i+1} - g_i) / h
//! ```
//!
//! whenever `f` vanishes at both end nodes.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    cells: usize,
    n_dim: u32,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    face_coef: Vec<f64>,
}

/// Boundary treatment for [`radial_laplacian`] at the two end nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClosure {
    /// Second-order one-sided stencils for `f'' + (n-1) f' / r`.
    OneSided,
    /// Zero flux through the outer face of the end control volume.
    ZeroFlux,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, cells: usize, n_dim: u32) -> Result<Self> {
        if !(r_min.is_finite() && r_min >= 1.0) {
            return Err(invalid(format!("r_min must be >= 1, got {r_min}")));
        }
        if !(r_max.is_finite() && r_max > r_min) {
            return Err(invalid(format!(
                "r_max must exceed r_min, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        if cells < MIN_CELLS {
            return Err(invalid(format!("need at least {MIN_CELLS} cells, got {cells}")));
        }
        if !(n_dim == 2 || n_dim == 3) {
            return Err(invalid(format!("n_dim must be 2 or 3, got {n_dim}")));
        }

        let h = (r_max - r_min) / cells as f64;
        let nodes: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { r_max } else { r_min + i as f64 * h })
            .collect();
        let n = n_dim as i32;
        let moment = |lo: f64, hi: f64| (hi.powi(n) - lo.powi(n)) / n as f64;
        let weights = nodes
            .iter()
            .map(|&r| {
                let lo = (r - 0.5 * h).max(r_min);
                let hi = (r + 0.5 * h).min(r_max);
                moment(lo, hi)
            })
            .collect();
        let face_coef = nodes
            .windows(2)
            .map(|w| (0.5 * (w[0] + w[1])).powi(n - 1))
            .collect();

        Ok(Self {
            r_min,
            r_max,
            cells,
            n_dim,
            h,
            nodes,
            weights,
            face_coef,
        })
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_dim(&self) -> u32 {
        self.n_dim
    }

    /// Uniform node spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫ f(r) r^{n-1} dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `r^{n-1}` at the face between node `i` and `i + 1`.
    pub fn face_coef(&self) -> &[f64] {
        &self.face_coef
    }

    /// Exact value of `∫ r^{n-1} dr` over the domain.
    pub fn measure(&self) -> f64 {
        let n = self.n_dim as i32;
        (self.r_max.powi(n) - self.r_min.powi(n)) / n as f64
    }

    /// Sample a function of `r` on the nodes.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.nodes.iter().map(|&r| f(r)).collect(),
            grid: Arc::clone(self),
        }
    }
}

pub fn make_grid(r_min: f64, r_max: f64, cells: usize, n_dim: u32) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(r_min, r_max, cells, n_dim).map(Arc::new)
}

/// Real samples on a [`RadialGrid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &Arc<RadialGrid>, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid: Arc::clone(grid),
        }
    }

    pub(crate) fn from_raw(grid: Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(
            Arc::clone(&self.grid),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Nodewise `f(r_i, self_i)`.
    pub fn map_with_r(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Field::from_raw(Arc::clone(&self.grid), values)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Field::from_raw(Arc::clone(&self.grid), values))
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Linear interpolation at `r`; `None` outside the grid.
    pub fn interpolate(&self, r: f64) -> Option<f64> {
        let g = &self.grid;
        if !(r >= g.r_min() && r <= g.r_max()) {
            return None;
        }
        let x = (r - g.r_min()) / g.h();
        let i = (x.floor() as usize).min(g.cells() - 1);
        let frac = (r - g.nodes()[i]) / g.h();
        Some(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }
}

/// `Σ w_i f_i`, a second-order approximation of `∫ f r^{n-1} dr`.
pub fn integrate(f: &Field) -> f64 {
    f.grid
        .weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Central differences inside, second-order one-sided stencils at the ends.
pub fn deriv_r(f: &Field) -> Field {
    let v = &f.values;
    let n = v.len();
    let h = f.grid.h();
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    Field::from_raw(Arc::clone(&f.grid), d)
}

/// Conservative discretization of `r^{1-n} ∂_r (r^{n-1} ∂_r f)`.
pub fn radial_laplacian(f: &Field, closure: BoundaryClosure) -> Field {
    let g = &f.grid;
    let v = &f.values;
    let n = v.len();
    let h = g.h();
    let a = g.face_coef();
    let w = g.weights();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let flux_right = a[i] * (v[i + 1] - v[i]);
        let flux_left = a[i - 1] * (v[i] - v[i - 1]);
        out[i] = (flux_right - flux_left) / (h * w[i]);
    }
    match closure {
        BoundaryClosure::ZeroFlux => {
            out[0] = a[0] * (v[1] - v[0]) / (h * w[0]);
            out[n - 1] = -a[n - 2] * (v[n - 1] - v[n - 2]) / (h * w[n - 1]);
        }
        BoundaryClosure::OneSided => {
            let nm1 = f64::from(g.n_dim() - 1);
            let h2 = h * h;
            let r0 = g.nodes()[0];
            let d2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
            let d1 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            out[0] = d2 + nm1 * d1 / r0;
            let rn = g.nodes()[n - 1];
            let d2 = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
            let d1 = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
            out[n - 1] = d2 + nm1 * d1 / rn;
        }
    }
    Field::from_raw(Arc::clone(g), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn spacing_and_node_count() {
        let g = make_grid(1.0, 2.0, 100, 2).unwrap();
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert_eq!(g.len(), 101);
        assert_eq!(g.nodes()[0], 1.0);
        assert_eq!(g.nodes()[100], 2.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(make_grid(0.5, 2.0, 100, 2).is_err());
        assert!(make_grid(2.0, 2.0, 100, 2).is_err());
        assert!(make_grid(1.0, 2.0, 7, 2).is_err());
        assert!(make_grid(1.0, 2.0, 100, 4).is_err());
    }

    #[test]
    fn weights_sum_to_measure() {
        let g = make_grid(1.0, 3.0, 200, 3).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!(rel(s, 26.0 / 3.0) < 1e-12);
        assert!(g.weights().iter().all(|&w| w > 0.0));
        for &(m, cells, n) in &[(5.0, 37, 2), (5.0, 1000, 3), (1.5, 8, 3)] {
            let g = make_grid(1.0, m, cells, n).unwrap();
            let one = Field::constant(&g, 1.0);
            assert!(rel(integrate(&one), g.measure()) < 1e-12);
        }
    }

    #[test]
    fn integrates_inverse_weight_to_length() {
        for n in [2, 3] {
            let g = make_grid(1.0, 5.0, 400, n).unwrap();
            let f = g.sample(|r| r.powi(1 - n as i32));
            let err = (integrate(&f) - 4.0).abs();
            assert!(err < 1e-4, "n = {n}: err {err}");
        }
    }

    #[test]
    fn derivative_exact_on_quadratics() {
        let g = make_grid(1.0, 4.0, 60, 2).unwrap();
        let d = deriv_r(&g.sample(|r| r));
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let d = deriv_r(&g.sample(|r| r * r));
        for (r, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - 2.0 * r).abs() < 1e-11);
        }
    }

    #[test]
    fn laplacian_of_constant_and_quadratic() {
        for n in [2, 3] {
            let g = make_grid(1.0, 4.0, 60, n).unwrap();
            for closure in [BoundaryClosure::OneSided, BoundaryClosure::ZeroFlux] {
                let l = radial_laplacian(&Field::constant(&g, 3.5), closure);
                assert!(l.max_abs() < 1e-12);
            }
            let l = radial_laplacian(&g.sample(|r| r * r), BoundaryClosure::OneSided);
            for v in l.values() {
                assert!((v - 2.0 * n as f64).abs() < 1e-9, "n = {n}: {v}");
            }
        }
    }

    #[test]
    fn laplacian_of_harmonic_is_second_order_small() {
        let err = |cells| {
            let g = make_grid(1.0, 3.0, cells, 3).unwrap();
            let l = radial_laplacian(&g.sample(|r| 1.0 / r), BoundaryClosure::OneSided);
            l.values()[1..l.len() - 1]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let (e1, e2) = (err(50), err(100));
        assert!(e1 < 1e-2);
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn summation_by_parts_is_second_order() {
        let gap = |cells| {
            let g = make_grid(1.0, 4.0, cells, 3).unwrap();
            let f = g.sample(|r| (r - 1.0) * (4.0 - r) * r);
            let q = g.sample(|r| ((r - 1.0) * (4.0 - r)).powi(2) * (1.0 + r).sin());
            let lhs = integrate(&f.zip_with(&radial_laplacian(&q, BoundaryClosure::OneSided), |a, b| a * b).unwrap());
            let rhs = -integrate(&deriv_r(&f).zip_with(&deriv_r(&q), |a, b| a * b).unwrap());
            (lhs - rhs).abs()
        };
        let (e1, e2) = (gap(80), gap(160));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let g = make_grid(1.0, 2.0, 10, 2).unwrap();
        let f = g.sample(|r| 3.0 * r - 1.0);
        assert!((f.interpolate(1.234).unwrap() - (3.0 * 1.234 - 1.0)).abs() < 1e-13);
        assert_eq!(f.interpolate(2.0), Some(5.0));
        assert!(f.interpolate(2.01).is_none());
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = make_grid(1.0, 2.0, 10, 2).unwrap();
        assert!(Field::new(Arc::clone(&g), vec![0.0; 10]).is_err());
        let mut v = vec![0.0; 11];
        v[3] = f64::NAN;
        assert!(Field::new(g, v).is_err());
    }
}
