//! Quadrature rules shared by the diagnostics.

use std::f64::consts::PI;

/// `n`-point Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the Chebyshev-like initial guess
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

/// Composite trapezoid weights for `n` uniform points with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Chebyshev–Gauss–Lobatto grid on `[0, L]` with Clenshaw–Curtis weights and
/// the spectral differentiation matrix.
#[derive(Debug, Clone)]
pub struct ChebyshevGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `(n+1) × (n+1)` first-derivative matrix.
    pub diff: Vec<f64>,
}

impl ChebyshevGrid {
    /// `n + 1` points, ordered from `y = 0` to `y = L`.
    pub fn new(n: usize, width: f64) -> Self {
        assert!(n >= 2, "Chebyshev grid needs n >= 2");
        let np = n + 1;
        // reference points x_k = -cos(kπ/n) on [-1, 1], increasing
        let x: Vec<f64> = (0..np).map(|k| -(PI * k as f64 / n as f64).cos()).collect();
        let scale = 0.5 * width;
        let nodes = x.iter().map(|&v| scale * (v + 1.0)).collect();

        // Clenshaw–Curtis weights (Waldvogel form, direct sum)
        let mut w = vec![0.0; np];
        for (k, wk) in w.iter_mut().enumerate() {
            let theta = PI * k as f64 / n as f64;
            let mut s = 0.0;
            for j in 1..=n / 2 {
                let b = if 2 * j == n { 1.0 } else { 2.0 };
                s += b / (4.0 * (j * j) as f64 - 1.0) * (2.0 * j as f64 * theta).cos();
            }
            let c = if k == 0 || k == n { 1.0 } else { 2.0 };
            *wk = c / n as f64 * (1.0 - s) * scale;
        }

        // Trefethen's differentiation matrix; x_k here is -cos, which flips the sign
        let c: Vec<f64> = (0..np)
            .map(|k| if k == 0 || k == n { 2.0 } else { 1.0 } * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let xc: Vec<f64> = (0..np).map(|k| (PI * k as f64 / n as f64).cos()).collect();
        let mut d = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                if i != j {
                    d[i * np + j] = c[i] / c[j] / (xc[i] - xc[j]);
                }
            }
        }
        for i in 0..np {
            let s: f64 = (0..np).filter(|&j| j != i).map(|j| d[i * np + j]).sum();
            d[i * np + i] = -s;
        }
        // d/dy = -(1/scale) d/dxc
        for v in d.iter_mut() {
            *v *= -1.0 / scale;
        }
        ChebyshevGrid {
            nodes,
            weights: w,
            diff: d,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn differentiate(&self, samples: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.diff[i * n + j] * samples[j]).sum())
            .collect()
    }

    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8, 0.0, 2.0);
        for p in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = 2f64.powi(p + 1) / (p + 1) as f64;
            assert!((q - exact).abs() < 1e-12 * exact, "degree {p}");
        }
    }

    #[test]
    fn chebyshev_integrates_and_differentiates_smooth_functions() {
        let g = ChebyshevGrid::new(40, 3.0);
        let f: Vec<f64> = g.nodes.iter().map(|&y| (1.3 * y).sin()).collect();
        let exact = (1.0 - (3.9f64).cos()) / 1.3;
        assert!((g.integrate(&f) - exact).abs() < 1e-13);
        let df = g.differentiate(&f);
        for (y, d) in g.nodes.iter().zip(&df) {
            assert!((d - 1.3 * (1.3 * y).cos()).abs() < 1e-10);
        }
        assert!(g.nodes[0].abs() < 1e-15 && (g.nodes[40] - 3.0).abs() < 1e-14);
    }
}
