//! Weighted norms, energy balances, inequality monitors and the decay law.
//!
//! `y`-integrals are taken exactly in the transverse basis (the modes are
//! orthonormal in `L₂(0, L)` and `∫ψ_l'ψ_m' = λ_l δ_lm`), `x`-integrals by the
//! trapezoid rule and `x`-derivatives by second-order stencils.

mod decay;
mod energy;
mod inequalities;

pub use decay::{decay_params, fit_decay, monotone_check, DecayFit, DecayParams, FitWindow, MonotoneReport};
pub use energy::{energy_identity_residual, EnergyIdentity, EnergyReport, EnergyTerm};
pub use inequalities::{
    bump_family, interpolation_ratio_monitor, steklov_check, steklov_family, Bump, BumpField, Inequality,
    MonitorGrid, MonitorReport, SteklovClass, TestField,
};

use crate::error::{Error, Result};
use crate::operators::{Field2D, FdOperator, GridSpec, ModalField};
use crate::quadrature::gauss_legendre;
use crate::weights::WeightProfile;

/// Highest total derivative order of [`interior_norm`].
pub const MAX_INTERIOR_ORDER: usize = 4;

/// `x`-derivatives `0..=max_order` of one axial profile.
pub(crate) fn x_derivatives(profile: &[f64], dx: f64, max_order: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![profile.to_vec()];
    for k in 1..=max_order {
        out.push(FdOperator::new(k, profile.len(), dx)?.apply(profile)?);
    }
    Ok(out)
}

/// `(Σ_{|α|≤k} ∬ (∂^α u)² ρ dx dy)^{1/2}`.
pub fn weighted_norm(u: &Field2D, grid: &GridSpec, w: &dyn WeightProfile, k: usize) -> Result<f64> {
    if k > 2 {
        return Err(Error::UnsupportedOrder { order: k, max: 2 });
    }
    let modal = ModalField::from_field(u, grid)?;
    Ok(weighted_norm_modal(&modal, grid, w, k)?.sqrt())
}

/// Square of [`weighted_norm`] from modal data.
pub fn weighted_norm_modal(u: &ModalField, grid: &GridSpec, w: &dyn WeightProfile, k: usize) -> Result<f64> {
    if k > 2 {
        return Err(Error::UnsupportedOrder { order: k, max: 2 });
    }
    let wx = grid.x_weights();
    let rho: Vec<f64> = (0..grid.nx).map(|i| w.value(grid.x(i))).collect();
    let lambdas = grid.basis().lambdas();
    let mut total = 0.0;
    for (l, &lam) in lambdas.iter().enumerate() {
        let d = x_derivatives(u.profile(l), grid.dx(), k)?;
        for p in 0..=k {
            for q in 0..=(k - p) {
                let s: f64 = (0..grid.nx).map(|i| wx[i] * rho[i] * d[p][i] * d[p][i]).sum();
                total += lam.powi(q as i32) * s;
            }
        }
    }
    Ok(total)
}

/// Weighted `L₂` norm of `∂_x^{α.0} ∂_y^{α.1} u` over `(x₀, X_max) × (y₀, L − y₀)`.
///
/// `y`-derivatives are spectral; the `y`-integral uses Gauss–Legendre nodes
/// and the `x`-integral the trapezoid rule, with the partial cell at `x₀`
/// interpolated linearly.
pub fn interior_norm(
    u: &Field2D,
    grid: &GridSpec,
    x0: f64,
    y0: f64,
    w: &dyn WeightProfile,
    alpha: (usize, usize),
) -> Result<f64> {
    let (ax, ay) = alpha;
    if ax + ay > MAX_INTERIOR_ORDER {
        return Err(Error::UnsupportedOrder {
            order: ax + ay,
            max: MAX_INTERIOR_ORDER,
        });
    }
    let width = grid.width();
    if !(0.0..0.5 * width).contains(&y0) {
        return Err(Error::Domain(format!("y0 = {y0} must lie in [0, L/2)")));
    }
    let x_max = grid.x_max;
    if !(0.0..x_max).contains(&x0) {
        return Err(Error::Domain(format!("x0 = {x0} must lie in [0, X_max)")));
    }
    let modal = ModalField::from_field(u, grid)?;
    let basis = grid.basis();
    let nm = basis.n_modes();
    let mut dx_profiles = Vec::with_capacity(nm);
    for l in 0..nm {
        let p = modal.profile(l);
        dx_profiles.push(if ax == 0 {
            p.to_vec()
        } else {
            FdOperator::new(ax, grid.nx, grid.dx())?.apply(p)?
        });
    }
    let (ys, wy) = gauss_legendre(4 * nm.max(8), y0, width - y0);
    let psi: Vec<Vec<f64>> = basis
        .modes()
        .iter()
        .map(|m| ys.iter().map(|&y| m.eval(y, ay as u32)).collect())
        .collect();
    let g: Vec<f64> = (0..grid.nx)
        .map(|i| {
            let mut s = 0.0;
            for (j, wj) in wy.iter().enumerate() {
                let v: f64 = (0..nm).map(|l| dx_profiles[l][i] * psi[l][j]).sum();
                s += wj * v * v;
            }
            s * w.value(grid.x(i))
        })
        .collect();
    let dx = grid.dx();
    let k = ((x0 / dx).ceil() as usize).min(grid.nx - 1);
    let mut total = 0.0;
    for i in k..grid.nx - 1 {
        total += 0.5 * dx * (g[i] + g[i + 1]);
    }
    let xk = grid.x(k);
    if xk > x0 && k > 0 {
        let th = (x0 - grid.x(k - 1)) / dx;
        let g0 = (1.0 - th) * g[k - 1] + th * g[k];
        total += 0.5 * (xk - x0) * (g0 + g[k]);
    }
    Ok(total.sqrt())
}
