//! Banded LU factorization with partial pivoting.
//!
//! Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl`
//! super-diagonals hold the fill-in created by row interchanges.

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[cfg(test)]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Factors in place. Returns the row of the first zero pivot on failure.
    pub fn factor(mut self) -> Result<BandLu, usize> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(k);
            }
            pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last_col {
                    let (ij, kj) = (self.idx(i, j), self.idx(k, j));
                    self.data[ij] -= l * self.data[kj];
                }
            }
        }
        Ok(BandLu { m: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= m.data[m.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                s -= m.data[m.idx(i, j)] * b[j];
            }
            b[i] = s / m.data[m.idx(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_residual(a: &BandMatrix, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn tridiagonal_poisson() {
        let n = 50;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        a.clone().factor().unwrap().solve(&mut x);
        assert!(dense_residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn needs_pivoting() {
        // Zero leading diagonal: fails without row interchanges.
        let mut a = BandMatrix::zeros(3, 2, 2);
        let rows = [[0.0, 1.0, 2.0], [3.0, 4.0, 5.0], [6.0, 7.0, 9.0]];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a.add(i, j, v);
            }
        }
        let b = [1.0, 2.0, 3.0];
        let mut x = b.to_vec();
        a.clone().factor().unwrap().solve(&mut x);
        assert!(dense_residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn singular_reports_row() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(3, 3, 1.0);
        assert_eq!(a.factor().unwrap_err(), 2);
    }

    proptest! {
        #[test]
        fn random_pentadiagonal(entries in proptest::collection::vec(-1.0f64..1.0, 5 * 40), rhs in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let n = 40;
            let mut a = BandMatrix::zeros(n, 2, 2);
            for i in 0..n {
                for d in 0..5 {
                    let j = i as isize + d as isize - 2;
                    if j >= 0 && (j as usize) < n {
                        let diag_boost = if d == 2 { 0.5 } else { 0.0 };
                        a.add(i, j as usize, entries[i * 5 + d] + diag_boost);
                    }
                }
            }
            if let Ok(lu) = a.clone().factor() {
                let mut x = rhs.clone();
                lu.solve(&mut x);
                let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                prop_assert!(dense_residual(&a, &x, &rhs) < 1e-9 * scale);
            }
        }
    }
}
