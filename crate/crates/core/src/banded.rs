//! Banded LU factorization with partial pivoting and a 1-norm condition
//! estimate, sized for the block-bidiagonal collocation systems.

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl`
/// super-diagonals hold fill-in from pivoting.
#[derive(Debug, Clone, PartialEq)]
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
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (off >= 0 && (off as usize) < self.width && i < self.n && j < self.n).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry inside the declared band; panics outside it.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside the band (kl = {}, ku = {})",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j).expect("index inside the matrix");
        self.data[s] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Maximal absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for (j, c) in cols.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *c += self.get(i, j).abs();
            }
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Factorizes in place; fails on an exactly zero pivot.
    pub fn lu(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&a, &b| self.get(a, k).abs().total_cmp(&self.get(b, k).abs()))
                .expect("non-empty pivot range");
            piv[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (a, b) = (self.slot(k, j).unwrap(), self.slot(p, j).unwrap());
                    self.data.swap(a, b);
                }
            }
            let d = self.get(k, k);
            if d == 0.0 {
                return Err(Error::Singular);
            }
            for i in k + 1..=last {
                let si = self.slot(i, k).unwrap();
                let l = self.data[si] / d;
                self.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=right {
                        let (a, b) = (self.slot(i, j).unwrap(), self.slot(k, j).unwrap());
                        self.data[a] -= l * self.data[b];
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// Factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.m.get(i, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }

    /// Solves `Aᵀ x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        for k in 0..n {
            let mut s = b[k];
            for i in k.saturating_sub(kl + ku)..k {
                s -= self.m.get(i, k) * b[i];
            }
            b[k] = s / self.m.get(k, k);
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= self.m.get(i, k) * b[i];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }

    /// Hager's estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.m.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let mut y = x.clone();
            self.solve(&mut y);
            est = y.iter().map(|v| v.abs()).sum();
            let mut z: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            self.solve_transpose(&mut z);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        est
    }
}

/// `‖A‖₁·‖A⁻¹‖₁` (estimated), or infinity for a singular matrix.
pub fn condition_estimate(a: &BandMatrix) -> f64 {
    let norm = a.norm1();
    match a.clone().lu() {
        Ok(lu) => norm * lu.inverse_norm1_estimate(),
        Err(_) => f64::INFINITY,
    }
}
