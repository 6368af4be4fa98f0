//! Banded matrices with LU factorization under partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column `j` holds rows
//! `j − ku − kl ..= j + kl`, the top `kl` slots reserved for pivoting fill-in.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    pivots: Option<Vec<usize>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            ld,
            ab: vec![0.0; ld * n],
            pivots: None,
        }
    }

    pub fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn is_factored(&self) -> bool {
        self.pivots.is_some()
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i <= j + self.kl && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    /// Entry `(i, j)`; zero outside the band. Meaningless after factorization.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.ab[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// # Panics
    /// When `(i, j)` lies outside the band or the matrix is already factored.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.pivots.is_none(), "matrix already factored");
        assert!(self.in_band(i, j), "({i}, {j}) outside the band");
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Clears row `i` inside the band.
    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            self.set(i, j, 0.0);
        }
    }

    pub fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert!(self.pivots.is_none(), "matvec on a factored matrix");
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in self.row_range(i) {
                s += self.ab[self.idx(i, j)] * x[j];
            }
            *yi = s;
        }
    }

    /// Product `self · other` as a banded matrix with summed bandwidths.
    pub fn mul(&self, other: &BandedMatrix) -> Result<BandedMatrix> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = BandedMatrix::zeros(self.n, self.kl + other.kl, self.ku + other.ku);
        for i in 0..self.n {
            for k in self.row_range(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in other.row_range(k) {
                    out.add(i, j, a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// `self + c · other` on the union of the bands.
    pub fn add_scaled(&self, c: f64, other: &BandedMatrix) -> Result<BandedMatrix> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = BandedMatrix::zeros(self.n, self.kl.max(other.kl), self.ku.max(other.ku));
        for i in 0..self.n {
            for j in self.row_range(i) {
                out.add(i, j, self.get(i, j));
            }
            for j in other.row_range(i) {
                out.add(i, j, c * other.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        (0..self.n)
            .flat_map(|i| self.row_range(i).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).abs())
            .fold(0.0, f64::max)
    }

    /// In-place LU with partial pivoting inside the band.
    pub fn factor(&mut self) -> Result<()> {
        if self.pivots.is_some() {
            return Ok(());
        }
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let tol = 1e-14 * self.max_abs().max(f64::MIN_POSITIVE);
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.ab[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tol {
                return Err(Error::SingularMatrix { column: k });
            }
            piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.ab[ik] / pivot;
                self.ab[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = self.ab[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.ab[ij] -= l * kj;
                }
            }
        }
        self.pivots = Some(piv);
        Ok(())
    }

    /// Solves in place using a previous [`factor`](Self::factor).
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let piv = self
            .pivots
            .as_ref()
            .ok_or_else(|| Error::Input("solve on an unfactored matrix".into()))?;
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        for k in 0..n {
            b.swap(k, piv[k]);
            let bk = b[k];
            for i in k + 1..=(k + self.kl).min(n - 1) {
                b[i] -= self.ab[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.kl + self.ku).min(n - 1) {
                s -= self.ab[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.ab[self.idx(i, i)];
        }
        Ok(())
    }
}

/// Factors a copy of `a` and solves `a x = rhs`.
pub fn banded_solve(a: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let mut lu = a.clone();
    lu.factor()?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x)?;
    Ok(x)
}
