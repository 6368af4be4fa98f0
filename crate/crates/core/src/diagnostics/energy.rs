//! Discrete evaluation of the weighted energy balances of the linear equation
//! `F = v_t + b v_x + v_xxx + v_xyy`.
//!
//! Every integral is evaluated at the recorded snapshots; `d/dt` comes from
//! three-point differences of the recorded integral series, so only interior
//! snapshots carry a residual.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::x_derivatives;
use crate::error::{Error, Result};
use crate::operators::{fd_weights, nonlinear_modal, GridSpec, ModalField};
use crate::solver::{Snapshot, SolverConfig};
use crate::weights::{LocalizedWeight, WeightFunction, WeightProfile};

/// Which balance law to evaluate.
///
/// * `L2`: multiplier `2vρ`, with the boundary flux `ρ(0)∫v_x²|_{x=0}`.
/// * `H1`: multiplier `−2((v_xρ)_x + v_yyρ)`, boundary flux in
///   `v_xx, v_x` at `x = 0`; assumes `v|_{x=0} = 0`.
/// * `L2Local`, `H1Local`: the same with `ρ` replaced by `ρ·η_{x₀}`, which
///   vanishes near `x = 0` so no boundary flux appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyIdentity {
    L2,
    H1,
    L2Local,
    H1Local,
}

impl EnergyIdentity {
    pub const ALL: [EnergyIdentity; 4] = [
        EnergyIdentity::L2,
        EnergyIdentity::H1,
        EnergyIdentity::L2Local,
        EnergyIdentity::H1Local,
    ];

    pub fn is_local(self) -> bool {
        matches!(self, EnergyIdentity::L2Local | EnergyIdentity::H1Local)
    }

    fn first_order(self) -> bool {
        matches!(self, EnergyIdentity::H1 | EnergyIdentity::H1Local)
    }

    pub fn tag(self) -> &'static str {
        match self {
            EnergyIdentity::L2 => "l2",
            EnergyIdentity::H1 => "h1",
            EnergyIdentity::L2Local => "l2_local",
            EnergyIdentity::H1Local => "h1_local",
        }
    }
}

impl fmt::Display for EnergyIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EnergyIdentity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnergyIdentity::ALL
            .into_iter()
            .find(|i| i.tag() == s.trim())
            .ok_or_else(|| Error::Input(format!("unknown identity `{s}` (expected l2, h1, l2_local or h1_local)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyTerm {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub identity: EnergyIdentity,
    pub x0: Option<f64>,
    /// Times of the interior snapshots at which the balance is evaluated.
    pub times: Vec<f64>,
    /// Left-hand-side terms in the order of the identity.
    pub terms: Vec<EnergyTerm>,
    pub rhs: Vec<f64>,
    /// Boundary flux produced by a nonzero inflow trace `v|_{x=0}` in the
    /// `L2` balance; identically zero for the other identities.
    pub inflow_correction: Vec<f64>,
    /// `Σ terms + inflow_correction − rhs` per time.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// `max |residual| / max (Σ|terms| + |rhs|)`.
    pub relative_residual: f64,
    /// `∫ v_x² |_{x=0} dy`.
    pub trace_vx_sq: Vec<f64>,
    /// `∫ v_tx² |_{x=0} dy`, the squared first time-derivative trace.
    pub trace_vtx_sq: Vec<f64>,
    /// `max_t ‖v(t, 0, ·)‖_{L₂(0,L)}`; the `H1` balance presumes it vanishes.
    pub max_inflow_trace: f64,
    /// The fourth mixed trace `u_xxyy|_{x=0}` is not evaluated.
    pub nu2_omitted: bool,
}

/// Per-snapshot integrals without the time derivative.
struct Slice {
    energy: f64,
    static_terms: Vec<f64>,
    rhs: f64,
    inflow: f64,
    trace_vx: Vec<f64>,
    trace_v: f64,
}

/// Evaluates `identity` along `snapshots` of a run made with `config`.
///
/// `F` is the run's forcing, minus the reconstructed `u u_x` when the run was
/// nonlinear. For the local identities `x0` is required and the weight is
/// `w·η_{x₀}`.
pub fn energy_identity_residual(
    snapshots: &[Snapshot],
    config: &SolverConfig,
    w: WeightFunction,
    identity: EnergyIdentity,
    x0: Option<f64>,
) -> Result<EnergyReport> {
    if snapshots.len() < 3 {
        return Err(Error::Input(format!(
            "energy balance needs at least 3 snapshots, got {}",
            snapshots.len()
        )));
    }
    let grid = &config.grid;
    let local;
    let weight: &dyn WeightProfile = if identity.is_local() {
        let x0 = x0.ok_or_else(|| Error::Input(format!("identity {identity} needs x0")))?;
        local = LocalizedWeight::new(w, x0)?;
        &local
    } else {
        &w
    };
    let rho: Vec<[f64; 4]> = (0..grid.nx).map(|i| weight.derivatives(grid.x(i))).collect();

    let slices = snapshots
        .par_iter()
        .map(|s| {
            let u = ModalField::from_field(&s.u, grid)?;
            let mut f = match &config.forcing {
                Some(src) => ModalField::from_field(&src.sample(s.t, grid), grid)?,
                None => ModalField::zeros(u.n_modes(), u.nx()),
            };
            if !config.linear_only {
                let n = nonlinear_modal(&u, grid);
                for (a, b) in f.data_mut().iter_mut().zip(n.data()) {
                    *a -= b;
                }
            }
            slice(&u, &f, grid, config.b, &rho, identity)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = slices.len();
    let mut times = Vec::with_capacity(n - 2);
    let n_static = slices[0].static_terms.len();
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(n - 2); n_static + 1];
    let mut rhs = Vec::with_capacity(n - 2);
    let mut inflow = Vec::with_capacity(n - 2);
    let mut trace_vx_sq = Vec::with_capacity(n - 2);
    let mut trace_vtx_sq = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let ts = [snapshots[i - 1].t, snapshots[i].t, snapshots[i + 1].t];
        if !(ts[0] < ts[1] && ts[1] < ts[2]) {
            return Err(Error::Input("snapshot times must be strictly increasing".into()));
        }
        let c = fd_weights(ts[1], &ts, 1);
        let d = |k: usize| c[k][1];
        times.push(ts[1]);
        terms[0].push(d(0) * slices[i - 1].energy + d(1) * slices[i].energy + d(2) * slices[i + 1].energy);
        for (k, v) in slices[i].static_terms.iter().enumerate() {
            terms[k + 1].push(*v);
        }
        rhs.push(slices[i].rhs);
        inflow.push(slices[i].inflow);
        trace_vx_sq.push(slices[i].trace_vx.iter().map(|v| v * v).sum());
        let vtx: f64 = (0..slices[i].trace_vx.len())
            .map(|l| {
                let v = d(0) * slices[i - 1].trace_vx[l]
                    + d(1) * slices[i].trace_vx[l]
                    + d(2) * slices[i + 1].trace_vx[l];
                v * v
            })
            .sum();
        trace_vtx_sq.push(vtx);
    }
    let m = times.len();
    let residual: Vec<f64> = (0..m)
        .map(|i| terms.iter().map(|t| t[i]).sum::<f64>() + inflow[i] - rhs[i])
        .collect();
    let scale = (0..m)
        .map(|i| terms.iter().map(|t| t[i].abs()).sum::<f64>() + inflow[i].abs() + rhs[i].abs())
        .fold(0.0, f64::max);
    let max_residual = residual.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    let names = term_names(identity);
    Ok(EnergyReport {
        identity,
        x0: if identity.is_local() { x0 } else { None },
        times,
        terms: names
            .iter()
            .zip(terms)
            .map(|(n, values)| EnergyTerm {
                name: (*n).to_string(),
                values,
            })
            .collect(),
        rhs,
        inflow_correction: inflow,
        residual,
        max_residual,
        relative_residual: if scale > 0.0 { max_residual / scale } else { 0.0 },
        trace_vx_sq,
        trace_vtx_sq,
        max_inflow_trace: slices.iter().fold(0.0, |a, s| a.max(s.trace_v.sqrt())),
        nu2_omitted: true,
    })
}

fn term_names(identity: EnergyIdentity) -> Vec<&'static str> {
    match identity {
        EnergyIdentity::L2 => vec![
            "d/dt ∬v²ρ",
            "ρ(0)∫v_x²|₀",
            "∬(3v_x²+v_y²−bv²)ρ'",
            "−∬v²ρ'''",
        ],
        EnergyIdentity::H1 => vec![
            "d/dt ∬(v_x²+v_y²)ρ",
            "∫(v_xx²ρ+2v_xxv_xρ'−v_x²ρ''+bv_x²ρ)|₀",
            "∬(3v_xx²+4v_xy²+v_yy²−bv_x²−bv_y²)ρ'",
            "−∬(v_x²+v_y²)ρ'''",
        ],
        EnergyIdentity::L2Local => vec!["d/dt ∬v²ρη", "∬(3v_x²+v_y²−bv²)(ρη)'", "−∬v²(ρη)'''"],
        EnergyIdentity::H1Local => vec![
            "d/dt ∬(v_x²+v_y²)ρη",
            "∬(3v_xx²+4v_xy²+v_yy²−bv_x²−bv_y²)(ρη)'",
            "−∬(v_x²+v_y²)(ρη)'''",
        ],
    }
}

fn slice(
    u: &ModalField,
    f: &ModalField,
    grid: &GridSpec,
    b: f64,
    rho: &[[f64; 4]],
    identity: EnergyIdentity,
) -> Result<Slice> {
    let wx = grid.x_weights();
    let lambdas = grid.basis().lambdas();
    let dx = grid.dx();
    let r0 = rho[0];
    let mut energy = 0.0;
    let (mut trace, mut bulk, mut third, mut rhs, mut inflow) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut trace_vx = Vec::with_capacity(lambdas.len());
    let mut trace_v = 0.0;
    for (l, &lam) in lambdas.iter().enumerate() {
        let d = x_derivatives(u.profile(l), dx, 2)?;
        let (c, c1, c2) = (&d[0], &d[1], &d[2]);
        let fl = f.profile(l);
        trace_vx.push(c1[0]);
        trace_v += c[0] * c[0];
        if identity.first_order() {
            for i in 0..grid.nx {
                let r = rho[i];
                let g = c1[i] * c1[i] + lam * c[i] * c[i];
                energy += wx[i] * g * r[0];
                bulk += wx[i]
                    * (3.0 * c2[i] * c2[i] + 4.0 * lam * c1[i] * c1[i] + lam * lam * c[i] * c[i] - b * g)
                    * r[1];
                third -= wx[i] * g * r[3];
                rhs -= 2.0 * wx[i] * fl[i] * (c2[i] * r[0] + c1[i] * r[1] - lam * c[i] * r[0]);
            }
            trace += c2[0] * c2[0] * r0[0] + 2.0 * c2[0] * c1[0] * r0[1] - c1[0] * c1[0] * r0[2]
                + b * c1[0] * c1[0] * r0[0];
        } else {
            for i in 0..grid.nx {
                let r = rho[i];
                energy += wx[i] * c[i] * c[i] * r[0];
                bulk += wx[i] * (3.0 * c1[i] * c1[i] + (lam - b) * c[i] * c[i]) * r[1];
                third -= wx[i] * c[i] * c[i] * r[3];
                rhs += 2.0 * wx[i] * fl[i] * c[i] * r[0];
            }
            trace += r0[0] * c1[0] * c1[0];
            inflow += -2.0 * r0[0] * c[0] * c2[0] + 2.0 * r0[1] * c[0] * c1[0] - r0[2] * c[0] * c[0]
                + (lam - b) * r0[0] * c[0] * c[0];
        }
    }
    let static_terms = if identity.is_local() {
        vec![bulk, third]
    } else {
        vec![trace, bulk, third]
    };
    Ok(Slice {
        energy,
        static_terms,
        rhs,
        inflow: if identity == EnergyIdentity::L2 { inflow } else { 0.0 },
        trace_vx,
        trace_v,
    })
}
