//! Truncated grid and sampled fields.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;
use crate::transverse::TransverseBasis;
use crate::weights::cutoff_eta;

/// Damping layer `σ_s(x) = peak · η((x − X_s)/(X_max − X_s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sponge {
    /// Absolute start `X_s`.
    pub start: f64,
    pub peak: f64,
}

impl Sponge {
    pub fn default_for(x_max: f64) -> Self {
        Sponge {
            start: 0.8 * x_max,
            peak: 10.0,
        }
    }

    pub fn none(x_max: f64) -> Self {
        Sponge {
            start: 0.8 * x_max,
            peak: 0.0,
        }
    }

    pub fn eval(&self, x: f64, x_max: f64) -> f64 {
        if self.peak == 0.0 {
            return 0.0;
        }
        self.peak * cutoff_eta((x - self.start) / (x_max - self.start))
    }
}

/// Axial grid on `[0, X_max]` paired with a transverse basis.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    pub sponge: Sponge,
    basis: Arc<TransverseBasis>,
}

impl GridSpec {
    pub fn new(x_max: f64, nx: usize, dt: f64, basis: Arc<TransverseBasis>) -> Result<Self> {
        let g = GridSpec {
            x_max,
            nx,
            dt,
            sponge: Sponge::default_for(x_max),
            basis,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_sponge(mut self, sponge: Sponge) -> Result<Self> {
        self.sponge = sponge;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0) {
            return Err(Error::Grid(format!("X_max = {} must be positive", self.x_max)));
        }
        if self.nx < 8 {
            return Err(Error::Grid(format!("N_x = {} is below the minimum of 8", self.nx)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Grid(format!("Δt = {} must be positive", self.dt)));
        }
        let s = self.sponge;
        if !(s.start > 0.0 && s.start < self.x_max) {
            return Err(Error::Grid(format!(
                "sponge start {} must lie in (0, {})",
                s.start, self.x_max
            )));
        }
        if !(s.peak >= 0.0) {
            return Err(Error::Grid(format!("sponge peak {} must be nonnegative", s.peak)));
        }
        Ok(())
    }

    pub fn basis(&self) -> &TransverseBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> Arc<TransverseBasis> {
        Arc::clone(&self.basis)
    }

    pub fn ny(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn width(&self) -> f64 {
        self.basis.width()
    }

    pub fn dx(&self) -> f64 {
        self.x_max / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn x_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.nx, self.dx())
    }

    pub fn sponge_profile(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|i| self.sponge.eval(self.x(i), self.x_max))
            .collect()
    }
}

/// Nodal samples `u(x_i, y_j)`, stored row-major as `data[i·ny + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Field2D {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Field2D {
            nx,
            ny,
            data: vec![0.0; nx * ny],
        }
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nx * ny {
            return Err(Error::Dimension {
                expected: nx * ny,
                got: data.len(),
            });
        }
        Ok(Field2D { nx, ny, data })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let ys = grid.basis().nodes();
        let mut out = Field2D::zeros(grid.nx, ys.len());
        for i in 0..grid.nx {
            let x = grid.x(i);
            for (j, &y) in ys.iter().enumerate() {
                out.data[i * out.ny + j] = f(x, y);
            }
        }
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ny + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.ny + j] = v;
    }

    /// Transverse samples at `x_i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ny..(i + 1) * self.ny]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ny..(i + 1) * self.ny]
    }

    /// Axial profile at `y_j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nx).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Field2D {
        Field2D {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &Field2D) -> Result<Field2D> {
        if self.data.len() != other.data.len() {
            return Err(Error::Dimension {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(Field2D {
            nx: self.nx,
            ny: self.ny,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    /// Discrete `L₂` norm squared: trapezoid in `x`, collocation rule in `y`.
    pub fn l2_norm_sq(&self, grid: &GridSpec) -> f64 {
        let wx = grid.x_weights();
        let wy = grid.basis().weights();
        let mut s = 0.0;
        for i in 0..self.nx {
            let r = self.row(i);
            let mut si = 0.0;
            for j in 0..self.ny {
                si += wy[j] * r[j] * r[j];
            }
            s += wx[i] * si;
        }
        s
    }

    pub fn l2_norm(&self, grid: &GridSpec) -> f64 {
        self.l2_norm_sq(grid).sqrt()
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.nx != grid.nx || self.ny != grid.ny() {
            return Err(Error::Dimension {
                expected: grid.nx * grid.ny(),
                got: self.nx * self.ny,
            });
        }
        Ok(())
    }
}

/// Per-mode axial profiles `û_l(x_i)`, stored as `data[l·nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    n_modes: usize,
    nx: usize,
    data: Vec<f64>,
}

impl ModalField {
    pub fn zeros(n_modes: usize, nx: usize) -> Self {
        ModalField {
            n_modes,
            nx,
            data: vec![0.0; n_modes * nx],
        }
    }

    pub fn from_field(u: &Field2D, grid: &GridSpec) -> Result<Self> {
        u.check_grid(grid)?;
        let basis = grid.basis();
        let mut out = ModalField::zeros(basis.n_modes(), u.nx);
        let mut c = vec![0.0; basis.n_modes()];
        for i in 0..u.nx {
            basis.forward_into(u.row(i), &mut c);
            for (l, v) in c.iter().enumerate() {
                out.data[l * u.nx + i] = *v;
            }
        }
        Ok(out)
    }

    pub fn to_field(&self, grid: &GridSpec) -> Field2D {
        let basis = grid.basis();
        let mut out = Field2D::zeros(self.nx, basis.nodes().len());
        let mut c = vec![0.0; self.n_modes];
        for i in 0..self.nx {
            for (l, v) in c.iter_mut().enumerate() {
                *v = self.data[l * self.nx + i];
            }
            basis.inverse_into(&c, out.row_mut(i));
        }
        out
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The axial profile of mode `l`.
    pub fn profile(&self, l: usize) -> &[f64] {
        &self.data[l * self.nx..(l + 1) * self.nx]
    }

    pub fn profile_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.data[l * self.nx..(l + 1) * self.nx]
    }

    /// Discrete `L₂` norm squared, identical to [`Field2D::l2_norm_sq`] of
    /// the synthesized field.
    pub fn l2_norm_sq(&self, grid: &GridSpec) -> f64 {
        let wx = grid.x_weights();
        let dn = grid.basis().discrete_norms();
        (0..self.n_modes)
            .map(|l| {
                dn[l]
                    * self
                        .profile(l)
                        .iter()
                        .zip(&wx)
                        .map(|(v, w)| w * v * v)
                        .sum::<f64>()
            })
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
