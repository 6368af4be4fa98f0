//! Compatibility stacks `Φ_m` (nonlinear) and `Φ̃_m` (linear) and the check
//! `∂_t^m μ(0, ·) = Φ_m(0, ·)`.
//!
//! All `x`-derivatives use the second-order stencils of
//! [`operators::d_x`](crate::operators::d_x) and
//! [`operators::d_x3`](crate::operators::d_x3); `∂_y²` acts exactly on the
//! transverse modes.

use std::io::Write;

use crate::error::{Error, Result};
use crate::operators::{FdOperator, Field2D, GridSpec, ModalField};
use crate::transverse::BoundaryTrace;

/// Orders above this are allowed but each one consumes three more
/// `x`-derivatives of second-order stencils.
pub const RECOMMENDED_MAX_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackVariant {
    Nonlinear,
    Linear,
}

#[derive(Debug, Clone)]
pub struct CompatibilityStack {
    pub variant: StackVariant,
    /// `fields[m]` is `Φ_m` on the grid.
    pub fields: Vec<Field2D>,
}

impl CompatibilityStack {
    pub fn order(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn phi(&self, m: usize) -> &Field2D {
        &self.fields[m]
    }

    /// `Φ_m(0, y_j)` at the collocation nodes.
    pub fn trace(&self, m: usize) -> &[f64] {
        self.fields[m].row(0)
    }

    /// CSV with columns `x, y, m, value`.
    pub fn write_csv<W: Write>(&self, grid: &GridSpec, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "m", "value"])?;
        let ys = grid.basis().nodes();
        for (m, f) in self.fields.iter().enumerate() {
            for i in 0..f.nx() {
                for (j, y) in ys.iter().enumerate() {
                    w.write_record(&[
                        format!("{}", grid.x(i)),
                        format!("{y}"),
                        m.to_string(),
                        format!("{}", f.get(i, j)),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `P = ∂x³ + ∂x∂y² + b∂x` and `∂x` on the grid.
struct Operators<'a> {
    grid: &'a GridSpec,
    b: f64,
    d1: FdOperator,
    d3: FdOperator,
}

impl<'a> Operators<'a> {
    fn new(grid: &'a GridSpec, b: f64) -> Result<Self> {
        Ok(Operators {
            grid,
            b,
            d1: FdOperator::new(1, grid.nx, grid.dx())?,
            d3: FdOperator::new(3, grid.nx, grid.dx())?,
        })
    }

    fn p(&self, u: &Field2D) -> Result<Field2D> {
        let m = ModalField::from_field(u, self.grid)?;
        let mut out = ModalField::zeros(m.n_modes(), m.nx());
        let mut t1 = vec![0.0; m.nx()];
        let mut t3 = vec![0.0; m.nx()];
        for (l, mode) in self.grid.basis().modes().iter().enumerate() {
            self.d1.apply_into(m.profile(l), &mut t1);
            self.d3.apply_into(m.profile(l), &mut t3);
            let c = self.b - mode.lambda;
            for (o, (a, d)) in out.profile_mut(l).iter_mut().zip(t3.iter().zip(&t1)) {
                *o = a + c * d;
            }
        }
        Ok(out.to_field(self.grid))
    }

    fn dx(&self, u: &Field2D) -> Result<Field2D> {
        let m = ModalField::from_field(u, self.grid)?;
        let mut out = ModalField::zeros(m.n_modes(), m.nx());
        for l in 0..m.n_modes() {
            self.d1.apply_into(m.profile(l), out.profile_mut(l));
        }
        Ok(out.to_field(self.grid))
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as f64
}

fn check_shape(u: &Field2D, grid: &GridSpec) -> Result<()> {
    if u.nx() != grid.nx || u.ny() != grid.ny() {
        return Err(Error::Dimension {
            expected: grid.nx * grid.ny(),
            got: u.nx() * u.ny(),
        });
    }
    Ok(())
}

/// Shared recursion: `Φ_m = ∂_t^{m−1}f − PΦ_{m−1} − [quadratic] Σ C(m−1,l) Φ_l ∂xΦ_{m−l−1}`.
fn recursion(
    u0: &Field2D,
    f_derivs: &[Field2D],
    grid: &GridSpec,
    b: f64,
    order: usize,
    quadratic: bool,
) -> Result<Vec<Field2D>> {
    check_shape(u0, grid)?;
    if order > RECOMMENDED_MAX_ORDER {
        log::warn!("compatibility order {order} exceeds the recommended cap {RECOMMENDED_MAX_ORDER}");
    }
    let ops = Operators::new(grid, b)?;
    let mut fields = vec![u0.clone()];
    let mut derivs: Vec<Field2D> = Vec::new();
    for m in 1..=order {
        let mut next = ops.p(&fields[m - 1])?.scaled(-1.0);
        if let Some(f) = f_derivs.get(m - 1) {
            check_shape(f, grid)?;
            next = next.axpy(1.0, f)?;
        }
        if quadratic {
            derivs.push(ops.dx(&fields[m - 1])?);
            for l in 0..m {
                let c = binomial(m - 1, l);
                let a = &fields[l];
                let d = &derivs[m - l - 1];
                for (o, (p, q)) in next.data_mut().iter_mut().zip(a.data().iter().zip(d.data())) {
                    *o -= c * p * q;
                }
            }
        }
        fields.push(next);
    }
    Ok(fields)
}

/// `Φ_0 .. Φ_M` of the nonlinear problem; `quadratic = false` drops the
/// `Φ_l ∂xΦ_{m−l−1}` sum.
pub fn phi_stack(
    u0: &Field2D,
    grid: &GridSpec,
    b: f64,
    order: usize,
    quadratic: bool,
) -> Result<CompatibilityStack> {
    Ok(CompatibilityStack {
        variant: StackVariant::Nonlinear,
        fields: recursion(u0, &[], grid, b, order, quadratic)?,
    })
}

/// `Φ̃_0 .. Φ̃_M` of the linear problem; `f_derivs[l] = ∂_t^l f(0, ·)` for
/// `l < M`.
pub fn phi_tilde_stack(
    u0: &Field2D,
    f_derivs: &[Field2D],
    grid: &GridSpec,
    b: f64,
    order: usize,
) -> Result<CompatibilityStack> {
    if f_derivs.len() < order {
        return Err(Error::Input(format!(
            "Φ̃ of order {order} needs ∂_t^l f for l < {order}, got {} fields",
            f_derivs.len()
        )));
    }
    Ok(CompatibilityStack {
        variant: StackVariant::Linear,
        fields: recursion(u0, f_derivs, grid, b, order, false)?,
    })
}

/// `Φ̃_m = (−1)^m P^m u₀ + Σ_{l<m} (−1)^{m−l−1} P^{m−l−1} ∂_t^l f(0)`.
pub fn phi_tilde_closed_form(
    u0: &Field2D,
    f_derivs: &[Field2D],
    grid: &GridSpec,
    b: f64,
    m: usize,
) -> Result<Field2D> {
    if f_derivs.len() < m {
        return Err(Error::Input(format!("closed form of order {m} needs {m} forcing derivatives")));
    }
    check_shape(u0, grid)?;
    let ops = Operators::new(grid, b)?;
    let power = |u: &Field2D, k: usize| -> Result<Field2D> {
        let mut v = u.clone();
        for _ in 0..k {
            v = ops.p(&v)?;
        }
        Ok(v)
    };
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = power(u0, m)?.scaled(sign(m));
    for (l, f) in f_derivs.iter().enumerate().take(m) {
        check_shape(f, grid)?;
        out = out.axpy(sign(m - l - 1), &power(f, m - l - 1)?)?;
    }
    Ok(out)
}

/// `‖∂_t^m μ(0,·) − Φ_m(0,·)‖_{L₂(0,L)}` for `m = 0..=M`.
///
/// Time derivatives use one-sided second-order differences on the first
/// `m + 2` samples of `μ`.
pub fn check_compatibility(
    mu: &BoundaryTrace,
    stack: &CompatibilityStack,
    order: usize,
) -> Result<Vec<f64>> {
    if stack.order() < order {
        return Err(Error::Input(format!(
            "stack has order {}, check asks for {order}",
            stack.order()
        )));
    }
    let basis = mu.basis();
    if stack.fields[0].ny() != basis.nodes().len() {
        return Err(Error::Dimension {
            expected: basis.nodes().len(),
            got: stack.fields[0].ny(),
        });
    }
    let mut out = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let width = if m == 0 { 1 } else { m + 2 };
        if mu.n_times() < width {
            return Err(Error::Input(format!(
                "∂_t^{m} μ at t = 0 needs {width} time samples, trace has {}",
                mu.n_times()
            )));
        }
        let w: Vec<f64> = if m == 0 {
            vec![1.0]
        } else {
            let nodes: Vec<f64> = (0..width).map(|k| k as f64 * mu.dt()).collect();
            crate::operators::fd_weights(0.0, &nodes, m)
                .into_iter()
                .map(|r| r[m])
                .collect()
        };
        let trace = stack.trace(m);
        let diff: Vec<f64> = (0..trace.len())
            .map(|j| {
                let d: f64 = w.iter().enumerate().map(|(k, wk)| wk * mu.samples(k)[j]).sum();
                d - trace[j]
            })
            .collect();
        out.push(basis.l2_norm_sq(&diff).sqrt());
    }
    Ok(out)
}
