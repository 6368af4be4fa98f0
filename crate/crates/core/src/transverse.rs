//! Transverse eigenfunction systems for the four `y`-boundary cases, the
//! collocation transforms that diagonalize `∂_y²`, and the anisotropic
//! `H^{s/3,s}` boundary norm.
//!
//! Collocation rules (all with exact discrete orthogonality):
//!
//! | case | boundary conditions          | nodes                      | modes                       |
//! |------|------------------------------|----------------------------|-----------------------------|
//! | a    | `ψ(0) = ψ(L) = 0`            | `jL/(n+1)`, `j = 1..n`     | `sin(lπy/L)`, `l = 1..n`    |
//! | b    | `ψ'(0) = ψ'(L) = 0`          | `(j+½)L/n`                 | `cos(lπy/L)`, `l = 0..n-1`  |
//! | c    | `ψ(0) = ψ'(L) = 0`           | `(j+½)L/n`                 | `sin((l-½)πy/L)`, `l = 1..n`|
//! | d    | periodic                     | `jL/n`, `n` even           | `1, cos, sin` pairs, Nyquist|

use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transverse boundary-condition family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcCase {
    /// (a) `u = 0` at `y = 0` and `y = L`
    #[serde(rename = "a")]
    DirichletDirichlet,
    /// (b) `u_y = 0` at both walls
    #[serde(rename = "b")]
    NeumannNeumann,
    /// (c) `u = 0` at `y = 0`, `u_y = 0` at `y = L`
    #[serde(rename = "c")]
    DirichletNeumann,
    /// (d) `L`-periodic in `y`
    #[serde(rename = "d")]
    Periodic,
}

impl BcCase {
    pub const ALL: [BcCase; 4] = [
        BcCase::DirichletDirichlet,
        BcCase::NeumannNeumann,
        BcCase::DirichletNeumann,
        BcCase::Periodic,
    ];

    pub fn tag(self) -> char {
        match self {
            BcCase::DirichletDirichlet => 'a',
            BcCase::NeumannNeumann => 'b',
            BcCase::DirichletNeumann => 'c',
            BcCase::Periodic => 'd',
        }
    }

    /// Smallest admissible mode index.
    pub fn first_index(self) -> usize {
        match self {
            BcCase::DirichletDirichlet | BcCase::DirichletNeumann => 1,
            BcCase::NeumannNeumann | BcCase::Periodic => 0,
        }
    }
}

impl fmt::Display for BcCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for BcCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(BcCase::DirichletDirichlet),
            "b" => Ok(BcCase::NeumannNeumann),
            "c" => Ok(BcCase::DirichletNeumann),
            "d" => Ok(BcCase::Periodic),
            other => Err(Error::Config(format!(
                "unknown boundary case '{other}': expected one of a, b, c, d"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModeShape {
    Constant,
    Sine,
    Cosine,
}

/// One analytic eigenpair `(λ, ψ)` of `-ψ'' = λψ` under a case's boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenpair {
    /// Index `l` in the case's own numbering.
    pub index: usize,
    /// Integer used in the `(|θ|^{2/3} + l²)` weight of the boundary norm.
    /// Equals `index` for cases a–c and the integer frequency `k` for case d.
    pub norm_index: i64,
    pub lambda: f64,
    pub shape: ModeShape,
    /// Angular wavenumber in `y`.
    pub freq: f64,
    pub amplitude: f64,
}

impl Eigenpair {
    /// `ψ^{(order)}(y)`.
    pub fn eval(&self, y: f64, order: u32) -> f64 {
        let k = self.freq;
        let a = self.amplitude;
        match self.shape {
            ModeShape::Constant => {
                if order == 0 {
                    a
                } else {
                    0.0
                }
            }
            ModeShape::Sine | ModeShape::Cosine => {
                let phase = if self.shape == ModeShape::Cosine {
                    std::f64::consts::FRAC_PI_2
                } else {
                    0.0
                };
                let shift = phase + f64::from(order) * std::f64::consts::FRAC_PI_2;
                a * k.powi(order as i32) * (k * y + shift).sin()
            }
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.eval(y, 0)
    }
}

/// Analytic eigenpair `l` for `case` on `(0, L)`.
pub fn eigensystem(case: BcCase, width: f64, l: usize) -> Result<Eigenpair> {
    use std::f64::consts::PI;
    if !(width > 0.0) {
        return Err(Error::Domain(format!("strip width L = {width} must be positive")));
    }
    let sin_amp = (2.0 / width).sqrt();
    let const_amp = (1.0 / width).sqrt();
    let out_of_range = || Error::Index {
        index: l as i64,
        what: format!("case {} eigenfunctions", case.tag()),
    };
    let pair = match case {
        BcCase::DirichletDirichlet => {
            if l == 0 {
                return Err(out_of_range());
            }
            let k = PI * l as f64 / width;
            Eigenpair {
                index: l,
                norm_index: l as i64,
                lambda: k * k,
                shape: ModeShape::Sine,
                freq: k,
                amplitude: sin_amp,
            }
        }
        BcCase::NeumannNeumann => {
            let k = PI * l as f64 / width;
            Eigenpair {
                index: l,
                norm_index: l as i64,
                lambda: k * k,
                shape: if l == 0 { ModeShape::Constant } else { ModeShape::Cosine },
                freq: k,
                amplitude: if l == 0 { const_amp } else { sin_amp },
            }
        }
        BcCase::DirichletNeumann => {
            if l == 0 {
                return Err(out_of_range());
            }
            let k = (l as f64 - 0.5) * PI / width;
            Eigenpair {
                index: l,
                norm_index: l as i64,
                lambda: k * k,
                shape: ModeShape::Sine,
                freq: k,
                amplitude: sin_amp,
            }
        }
        BcCase::Periodic => {
            let kint = (l + 1) / 2;
            let k = 2.0 * PI * kint as f64 / width;
            let shape = if l == 0 {
                ModeShape::Constant
            } else if l % 2 == 1 {
                ModeShape::Cosine
            } else {
                ModeShape::Sine
            };
            Eigenpair {
                index: l,
                norm_index: kint as i64,
                lambda: k * k,
                shape,
                freq: k,
                amplitude: if l == 0 { const_amp } else { sin_amp },
            }
        }
    };
    Ok(pair)
}

/// Truncated eigenbasis with its collocation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseBasis {
    case: BcCase,
    width: f64,
    modes: Vec<Eigenpair>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `ψ_l(y_j)`, row-major by mode.
    table: Vec<f64>,
    /// `Σ_j w_j ψ_l(y_j)²`; 1 except for the periodic Nyquist mode.
    discrete_norms: Vec<f64>,
}

impl TransverseBasis {
    pub fn new(case: BcCase, width: f64, n_modes: usize) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("strip width L = {width} must be positive")));
        }
        if n_modes == 0 {
            return Err(Error::Grid("transverse basis needs at least one mode".into()));
        }
        if case == BcCase::Periodic && n_modes % 2 != 0 {
            return Err(Error::Grid(format!(
                "periodic basis needs an even number of modes, got {n_modes}"
            )));
        }
        let n = n_modes as f64;
        let (nodes, w): (Vec<f64>, f64) = match case {
            BcCase::DirichletDirichlet => (
                (1..=n_modes).map(|j| j as f64 * width / (n + 1.0)).collect(),
                width / (n + 1.0),
            ),
            BcCase::NeumannNeumann | BcCase::DirichletNeumann => (
                (0..n_modes).map(|j| (j as f64 + 0.5) * width / n).collect(),
                width / n,
            ),
            BcCase::Periodic => ((0..n_modes).map(|j| j as f64 * width / n).collect(), width / n),
        };
        let weights = vec![w; n_modes];
        let first = case.first_index();
        let modes = (first..first + n_modes)
            .map(|l| eigensystem(case, width, l))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Vec::with_capacity(n_modes * n_modes);
        let mut discrete_norms = Vec::with_capacity(n_modes);
        for m in &modes {
            let mut s = 0.0;
            for (&y, &wj) in nodes.iter().zip(&weights) {
                let v = m.value(y);
                table.push(v);
                s += wj * v * v;
            }
            discrete_norms.push(s);
        }
        Ok(TransverseBasis {
            case,
            width,
            modes,
            nodes,
            weights,
            table,
            discrete_norms,
        })
    }

    pub fn case(&self) -> BcCase {
        self.case
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Eigenpair] {
        &self.modes
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights of the collocation rule.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn discrete_norms(&self) -> &[f64] {
        &self.discrete_norms
    }

    #[inline]
    pub fn psi_at_node(&self, l: usize, j: usize) -> f64 {
        self.table[l * self.nodes.len() + j]
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n_modes() {
            return Err(Error::Dimension {
                expected: self.n_modes(),
                got,
            });
        }
        Ok(())
    }

    /// Mode coefficients `c_l = ⟨u, ψ_l⟩_h / ⟨ψ_l, ψ_l⟩_h`.
    pub fn forward(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples.len())?;
        let mut out = vec![0.0; self.n_modes()];
        self.forward_into(samples, &mut out);
        Ok(out)
    }

    /// Unchecked forward transform into a caller buffer.
    pub fn forward_into(&self, samples: &[f64], out: &mut [f64]) {
        let n = self.nodes.len();
        for (l, o) in out.iter_mut().enumerate() {
            let row = &self.table[l * n..(l + 1) * n];
            let mut s = 0.0;
            for j in 0..n {
                s += self.weights[j] * row[j] * samples[j];
            }
            *o = s / self.discrete_norms[l];
        }
    }

    /// Raw discrete inner products `⟨u, ψ_l⟩_h`.
    pub fn inner_products(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_len(samples.len())?;
        let n = self.nodes.len();
        Ok((0..self.n_modes())
            .map(|l| {
                (0..n)
                    .map(|j| self.weights[j] * self.table[l * n + j] * samples[j])
                    .sum()
            })
            .collect())
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(coeffs.len())?;
        let mut out = vec![0.0; self.nodes.len()];
        self.inverse_into(coeffs, &mut out);
        Ok(out)
    }

    pub fn inverse_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.nodes.len();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (l, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.table[l * n..(l + 1) * n];
            for j in 0..n {
                out[j] += c * row[j];
            }
        }
    }

    /// `Σ_l c_l ψ_l^{(order)}(y)` at an arbitrary point.
    pub fn evaluate(&self, coeffs: &[f64], y: f64, order: u32) -> f64 {
        coeffs
            .iter()
            .zip(&self.modes)
            .map(|(&c, m)| c * m.eval(y, order))
            .sum()
    }

    /// Discrete `L₂(0, L)` norm squared of nodal samples.
    pub fn l2_norm_sq(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * u * u)
            .sum()
    }

    /// Modes kept by the 2/3 dealiasing rule (all of them outside case d).
    pub fn dealias_mask(&self) -> Vec<bool> {
        match self.case {
            BcCase::Periodic => {
                let kmax = self.n_modes() as i64 / 3;
                self.modes.iter().map(|m| m.norm_index <= kmax).collect()
            }
            _ => vec![true; self.n_modes()],
        }
    }
}

/// Boundary data `μ(t_i, y_j)` on a uniform time grid and the collocation nodes.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    basis: Arc<TransverseBasis>,
    dt: f64,
    /// `values[i]` holds the nodal samples at `t_i = i·dt`.
    values: Vec<Vec<f64>>,
}

impl BoundaryTrace {
    pub fn new(basis: Arc<TransverseBasis>, dt: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("boundary trace has no time samples".into()));
        }
        if !(dt > 0.0) && values.len() > 1 {
            return Err(Error::Input(format!("time step {dt} must be positive")));
        }
        for row in &values {
            if row.len() != basis.n_modes() {
                return Err(Error::Dimension {
                    expected: basis.n_modes(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input("boundary trace contains non-finite values".into()));
            }
        }
        Ok(BoundaryTrace { basis, dt, values })
    }

    /// Samples `f(t, y)` on `n_t` uniform times spanning `[0, T]`.
    pub fn from_fn(
        basis: Arc<TransverseBasis>,
        t_final: f64,
        n_t: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::Input("need at least one time sample".into()));
        }
        let dt = if n_t > 1 { t_final / (n_t - 1) as f64 } else { 1.0 };
        let values = (0..n_t)
            .map(|i| {
                let t = i as f64 * dt;
                basis.nodes().iter().map(|&y| f(t, y)).collect()
            })
            .collect();
        BoundaryTrace::new(basis, dt, values)
    }

    pub fn zeros(basis: Arc<TransverseBasis>, t_final: f64, n_t: usize) -> Result<Self> {
        BoundaryTrace::from_fn(basis, t_final, n_t, |_, _| 0.0)
    }

    /// Reads CSV with columns `t, y, mu`. Nodes must match the basis
    /// collocation points and times must be uniform.
    pub fn from_csv<R: Read>(basis: Arc<TransverseBasis>, reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Input(format!("boundary CSV lacks column '{name}'")))
        };
        let (ct, cy, cm) = (col("t")?, col("y")?, col("mu")?);
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Input(format!("bad number in boundary CSV row {rec:?}")))
            };
            rows.push((parse(ct)?, parse(cy)?, parse(cm)?));
        }
        let mut times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let n_t = times.len();
        if n_t == 0 {
            return Err(Error::Input("boundary CSV is empty".into()));
        }
        let dt = if n_t > 1 { times[1] - times[0] } else { 1.0 };
        let tol = 1e-9 * dt.abs().max(1.0);
        for (i, &t) in times.iter().enumerate() {
            if (t - (times[0] + i as f64 * dt)).abs() > tol {
                return Err(Error::Input("boundary CSV times are not uniform".into()));
            }
        }
        if times[0].abs() > tol {
            return Err(Error::Input("boundary CSV must start at t = 0".into()));
        }
        let ny = basis.n_modes();
        let mut values = vec![vec![f64::NAN; ny]; n_t];
        for (t, y, mu) in rows {
            let i = ((t - times[0]) / dt).round() as usize;
            let j = basis
                .nodes()
                .iter()
                .position(|&yn| (yn - y).abs() < 1e-9 * basis.width().max(1.0))
                .ok_or_else(|| {
                    Error::Input(format!("y = {y} is not a collocation node of the basis"))
                })?;
            values[i][j] = mu;
        }
        if values.iter().flatten().any(|v| v.is_nan()) {
            return Err(Error::Input("boundary CSV does not cover every (t, y) node".into()));
        }
        BoundaryTrace::new(basis, dt, values)
    }

    pub fn basis(&self) -> &TransverseBasis {
        &self.basis
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_times(&self) -> usize {
        self.values.len()
    }

    pub fn t_final(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    pub fn samples(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Linear interpolation in time; constant extrapolation beyond the grid.
    pub fn at(&self, t: f64) -> Vec<f64> {
        let n = self.values.len();
        if n == 1 || t <= 0.0 {
            return self.values[0].clone();
        }
        let s = t / self.dt;
        let i = s.floor() as usize;
        if i + 1 >= n {
            return self.values[n - 1].clone();
        }
        let th = s - i as f64;
        self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| (1.0 - th) * a + th * b)
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> BoundaryTrace {
        BoundaryTrace {
            basis: self.basis.clone(),
            dt: self.dt,
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Discrete space-time `L₂` norm `(Δt Σ_i Σ_j w_j μ_ij²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.dt
            * self
                .values
                .iter()
                .map(|r| self.basis.l2_norm_sq(r))
                .sum::<f64>())
        .sqrt()
    }
}

/// Angular frequencies of the zero-padded time transform, in FFT order.
pub fn padded_frequencies(n_t: usize, dt: f64) -> Vec<f64> {
    let m = 2 * n_t;
    (0..m)
        .map(|k| {
            let ks = if k < m / 2 { k as i64 } else { k as i64 - m as i64 };
            2.0 * std::f64::consts::PI * ks as f64 / (m as f64 * dt)
        })
        .collect()
}

/// `(|θ|^{2/3} + l²)^s`, with `+∞` where the base vanishes and `s < 0`.
pub fn anisotropic_weight(theta: f64, norm_index: i64, s: f64) -> f64 {
    let base = theta.abs().powf(2.0 / 3.0) + (norm_index * norm_index) as f64;
    if base == 0.0 {
        return if s < 0.0 {
            f64::INFINITY
        } else if s == 0.0 {
            1.0
        } else {
            0.0
        };
    }
    base.powf(s)
}

/// `H^{s/3,s}` norm of a boundary trace.
///
/// The trace is zero-extended outside `[0, T]`, transformed in `t` by a
/// rectangle-rule DFT with 2× padding and projected on `ψ_l` in `y`; the
/// `θ`-integral is the matching Riemann sum with measure `dθ/2π`, so that
/// `s = 0` reproduces the discrete space-time `L₂` norm exactly.
pub fn boundary_norm(mu: &BoundaryTrace, s: f64) -> f64 {
    let basis = mu.basis();
    let n_t = mu.n_times();
    let m = 2 * n_t;
    let dt = mu.dt();
    let theta = padded_frequencies(n_t, dt);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let n_modes = basis.n_modes();
    // a_l(t_i) = ⟨μ(t_i, ·), ψ_l⟩_h
    let projections: Vec<Vec<f64>> = (0..n_t)
        .map(|i| basis.inner_products(mu.samples(i)).expect("trace shape checked"))
        .collect();
    let mut total = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for l in 0..n_modes {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for i in 0..n_t {
            buf[i] = Complex64::new(projections[i][l], 0.0);
        }
        fft.process(&mut buf);
        let norm_index = basis.modes()[l].norm_index;
        for (k, z) in buf.iter().enumerate() {
            let mag = z.norm_sqr();
            if mag == 0.0 {
                continue;
            }
            let w = anisotropic_weight(theta[k], norm_index, s);
            total += w * mag;
        }
    }
    let norm_sq = total * dt / m as f64;
    if norm_sq.is_finite() {
        norm_sq.sqrt()
    } else {
        f64::INFINITY
    }
}
