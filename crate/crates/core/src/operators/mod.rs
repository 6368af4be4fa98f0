//! Axial discretization: stencils, banded algebra, the per-mode linear
//! operators and the nonlinear term.
//!
//! The solver's mode operator is `A_l = D³ + (b − λ_l) D` where `D` is the
//! summation-by-parts first derivative ([`stencil::sbp_d1`]). Its interior
//! rows therefore span seven points (`kl = ku = 3`). Three rows are replaced
//! by closures: `u_0 = μ̂_l` (inflow), `(u_{N−1} − u_{N−2})/Δx = 0` and
//! `u_{N−1} = 0`.

mod banded;
mod field;
mod stencil;

pub use banded::{banded_solve, BandedMatrix};
pub use field::{Field2D, GridSpec, ModalField, Sponge};
pub use stencil::{d_x, d_x2, d_x3, d_x4, fd_weights, sbp_d1, FdOperator};

use crate::error::{Error, Result};

/// Half-width of the solver's mode operator band.
pub const MODE_BANDWIDTH: usize = 3;

/// The summation-by-parts first derivative as a tridiagonal matrix.
pub fn sbp_d1_matrix(n: usize, dx: f64) -> BandedMatrix {
    let mut d = BandedMatrix::zeros(n, 1, 1);
    let c = 0.5 / dx;
    for i in 1..n - 1 {
        d.set(i, i - 1, -c);
        d.set(i, i + 1, c);
    }
    d.set(0, 0, -1.0 / dx);
    d.set(0, 1, 1.0 / dx);
    d.set(n - 1, n - 2, -1.0 / dx);
    d.set(n - 1, n - 1, 1.0 / dx);
    d
}

/// `D³ + c·D` without closures.
pub fn dispersive_operator(n: usize, dx: f64, advection: f64) -> BandedMatrix {
    let d = sbp_d1_matrix(n, dx);
    let d3 = d.mul(&d).and_then(|d2| d2.mul(&d)).expect("square sizes agree");
    d3.add_scaled(advection, &d).expect("square sizes agree")
}

/// Rows carrying the equation; the others hold boundary closures.
pub fn is_closure_row(i: usize, n: usize) -> bool {
    i == 0 || i + 2 >= n
}

/// Overwrites the three closure rows of `m`.
pub fn apply_closures(m: &mut BandedMatrix, dx: f64) {
    let n = m.size();
    for i in [0, n - 2, n - 1] {
        m.clear_row(i);
    }
    m.set(0, 0, 1.0);
    m.set(n - 2, n - 2, -1.0 / dx);
    m.set(n - 2, n - 1, 1.0 / dx);
    m.set(n - 1, n - 1, 1.0);
}

/// `A_l = ∂x³ + (b − λ_l)∂x` for mode slot `l` with the three closure rows.
pub fn assemble_mode_operator(l: usize, b: f64, grid: &GridSpec) -> Result<BandedMatrix> {
    let modes = grid.basis().modes();
    let lambda = modes
        .get(l)
        .ok_or(Error::Index {
            index: l as i64,
            what: "mode slot".into(),
        })?
        .lambda;
    let mut a = dispersive_operator(grid.nx, grid.dx(), b - lambda);
    apply_closures(&mut a, grid.dx());
    Ok(a)
}

/// Implicit and explicit Crank–Nicolson matrices for one mode:
/// `I ± (Δt/2)(A_l + Σ + ν)` on equation rows, closures on the implicit one.
pub fn crank_nicolson_pair(
    lambda: f64,
    b: f64,
    grid: &GridSpec,
    sponge: &[f64],
    hyperviscosity: f64,
) -> (BandedMatrix, BandedMatrix) {
    let n = grid.nx;
    let dx = grid.dx();
    let mut a = dispersive_operator(n, dx, b - lambda);
    for (i, s) in sponge.iter().enumerate() {
        a.add(i, i, *s);
    }
    if hyperviscosity > 0.0 {
        add_grid_damping(&mut a, hyperviscosity, dx);
    }
    let half = 0.5 * grid.dt;
    let mut lhs = BandedMatrix::identity(n, MODE_BANDWIDTH, MODE_BANDWIDTH)
        .add_scaled(half, &a)
        .expect("sizes agree");
    let rhs = BandedMatrix::identity(n, MODE_BANDWIDTH, MODE_BANDWIDTH)
        .add_scaled(-half, &a)
        .expect("sizes agree");
    apply_closures(&mut lhs, dx);
    (lhs, rhs)
}

/// Adds `(ε/Δx)·GᵀG`, where `G` is the undivided second difference on
/// rows `1..N−1`. In the interior this is `ε Δx³ ∂x⁴`; as a whole it is
/// symmetric positive semidefinite, so it only removes energy.
pub fn add_grid_damping(a: &mut BandedMatrix, eps: f64, dx: f64) {
    let n = a.size();
    let c = eps / dx;
    for k in 1..n - 1 {
        let g = [(k - 1, 1.0), (k, -2.0), (k + 1, 1.0)];
        for &(i, gi) in &g {
            for &(j, gj) in &g {
                a.add(i, j, c * gi * gj);
            }
        }
    }
}

/// Skew-symmetric `u u_x ≈ (1/3)[D(u²) + u·Du]` in modal form.
///
/// Products are formed at the collocation nodes; for periodic strips the
/// input and output are truncated by the 2/3 rule.
pub fn nonlinear_modal(u: &ModalField, grid: &GridSpec) -> ModalField {
    let basis = grid.basis();
    let nm = basis.n_modes();
    let ny = basis.nodes().len();
    let nx = grid.nx;
    let dx = grid.dx();
    let mask = basis.dealias_mask();
    let dealias = mask.iter().any(|k| !k);

    let mut src = u.clone();
    if dealias {
        for (l, keep) in mask.iter().enumerate() {
            if !keep {
                src.profile_mut(l).iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }
    let mut du = ModalField::zeros(nm, nx);
    for l in 0..nm {
        sbp_d1(src.profile(l), dx, du.profile_mut(l));
    }
    let phys = src.to_field(grid);
    let dphys = du.to_field(grid);

    let mut sq = Field2D::zeros(nx, ny);
    let mut prod = Field2D::zeros(nx, ny);
    for ((s, p), (v, dv)) in sq
        .data_mut()
        .iter_mut()
        .zip(prod.data_mut().iter_mut())
        .zip(phys.data().iter().zip(dphys.data()))
    {
        *s = v * v;
        *p = v * dv;
    }
    let sq_m = ModalField::from_field(&sq, grid).expect("grid-shaped");
    let prod_m = ModalField::from_field(&prod, grid).expect("grid-shaped");
    let mut out = ModalField::zeros(nm, nx);
    let mut tmp = vec![0.0; nx];
    for l in 0..nm {
        if !mask[l] {
            continue;
        }
        sbp_d1(sq_m.profile(l), dx, &mut tmp);
        let p = prod_m.profile(l);
        for (i, o) in out.profile_mut(l).iter_mut().enumerate() {
            *o = (tmp[i] + p[i]) / 3.0;
        }
    }
    out
}

/// [`nonlinear_modal`] on nodal samples.
pub fn nonlinear_term(u: &Field2D, grid: &GridSpec) -> Result<Field2D> {
    let m = ModalField::from_field(u, grid)?;
    Ok(nonlinear_modal(&m, grid).to_field(grid))
}
