//! Finite-difference stencils in `x`.
//!
//! Diagnostic derivatives ([`FdOperator`]) are second order everywhere, with
//! one-sided closures near both ends. The solver instead uses the
//! summation-by-parts first derivative [`sbp_d1`] and its cube, which give
//! an exact discrete energy balance.

use crate::error::{Error, Result};

/// Fornberg's algorithm: `c[j][k]` is the weight of node `j` in the order-`k`
/// derivative at `z`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights for derivative `order` at node offset `z` on integer nodes `nodes`.
fn weights_on(nodes: &[i64], z: f64, order: usize) -> Vec<f64> {
    let x: Vec<f64> = nodes.iter().map(|&v| v as f64).collect();
    fd_weights(z, &x, order)
        .into_iter()
        .map(|row| row[order])
        .collect()
}

/// A second-order derivative operator of fixed order on a uniform grid.
#[derive(Debug, Clone)]
pub struct FdOperator {
    order: usize,
    n: usize,
    scale: f64,
    half: usize,
    interior: Vec<f64>,
    /// `left[r]` are the weights for row `r` on nodes `0..width`.
    left: Vec<Vec<f64>>,
}

impl FdOperator {
    pub fn new(order: usize, n: usize, h: f64) -> Result<Self> {
        if order == 0 || order > 4 {
            return Err(Error::UnsupportedOrder { order, max: 4 });
        }
        let half = order.div_ceil(2);
        let width = order + 2;
        if n < width.max(2 * half + 1) {
            return Err(Error::Grid(format!(
                "{n} points cannot carry a derivative of order {order} (need {width})"
            )));
        }
        let centered: Vec<i64> = (-(half as i64)..=half as i64).collect();
        let interior = weights_on(&centered, 0.0, order);
        let one_sided: Vec<i64> = (0..width as i64).collect();
        let left = (0..half)
            .map(|r| weights_on(&one_sided, r as f64, order))
            .collect();
        Ok(FdOperator {
            order,
            n,
            scale: h.powi(-(order as i32)),
            half,
            interior,
            left,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: u.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.apply_into(u, &mut out);
        Ok(out)
    }

    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.n;
        let h = self.half;
        // odd derivatives flip sign under reflection x -> -x
        let sign = if self.order % 2 == 1 { -1.0 } else { 1.0 };
        for i in h..n - h {
            let mut s = 0.0;
            for (k, w) in self.interior.iter().enumerate() {
                s += w * u[i + k - h];
            }
            out[i] = s * self.scale;
        }
        for (r, w) in self.left.iter().enumerate() {
            let mut sl = 0.0;
            let mut sr = 0.0;
            for (k, wk) in w.iter().enumerate() {
                sl += wk * u[k];
                sr += wk * u[n - 1 - k];
            }
            out[r] = sl * self.scale;
            out[n - 1 - r] = sign * sr * self.scale;
        }
    }
}

/// `∂_x` with centered interior and one-sided second-order ends.
pub fn d_x(profile: &[f64], dx: f64) -> Result<Vec<f64>> {
    FdOperator::new(1, profile.len(), dx)?.apply(profile)
}

/// `∂_x²`, second order.
pub fn d_x2(profile: &[f64], dx: f64) -> Result<Vec<f64>> {
    FdOperator::new(2, profile.len(), dx)?.apply(profile)
}

/// `∂_x³`: `(−u_{i−2} + 2u_{i−1} − 2u_{i+1} + u_{i+2}) / (2Δx³)` inside,
/// one-sided second-order rows near the ends.
pub fn d_x3(profile: &[f64], dx: f64) -> Result<Vec<f64>> {
    FdOperator::new(3, profile.len(), dx)?.apply(profile)
}

/// `∂_x⁴`, second order.
pub fn d_x4(profile: &[f64], dx: f64) -> Result<Vec<f64>> {
    FdOperator::new(4, profile.len(), dx)?.apply(profile)
}

/// Summation-by-parts first derivative: centered inside, first-order
/// one-sided rows at both ends. With `H = Δx·diag(½, 1, …, 1, ½)` it
/// satisfies `H D + Dᵀ H = diag(−1, 0, …, 0, 1)`.
pub fn sbp_d1(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    let inv2h = 0.5 / dx;
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) * inv2h;
    }
    out[0] = (u[1] - u[0]) / dx;
    out[n - 1] = (u[n - 1] - u[n - 2]) / dx;
}
