//! Constants of the exponential decay law and fitting of decay rates.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::transverse::BcCase;

pub const EPSILON0_POLICY: &str = "the smallness threshold is not computable; decay runs use amplitude 1e-3 and report the observed margin";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayParams {
    pub case: BcCase,
    /// Strip width `L`.
    pub width: f64,
    pub b: f64,
    /// Steklov constant: 1 when both ends are clamped, 4 for one end.
    pub sigma: f64,
    pub c0: f64,
    /// Width threshold `L₀`; `None` stands for `+∞` (`b ≤ 0`).
    pub l0: Option<f64>,
    pub alpha0: f64,
    pub beta: f64,
    pub alpha: f64,
    pub admissible: bool,
    pub epsilon0_policy: String,
}

impl DecayParams {
    /// Guaranteed decay rate `αβ` of the weighted energy.
    pub fn rate(&self) -> f64 {
        self.alpha * self.beta
    }
}

/// `σ`, `c₀ = π²/(2σ)`, `β = c₀/(4L²)`, `α₀ = √c₀/(8L)` and `L₀` for a strip.
pub fn decay_params(case: BcCase, width: f64, b: f64, alpha: f64) -> Result<DecayParams> {
    let sigma = match case {
        BcCase::DirichletDirichlet => 1.0,
        BcCase::DirichletNeumann => 4.0,
        other => return Err(Error::UnsupportedCase(other.tag())),
    };
    if !(width > 0.0) {
        return Err(Error::Domain(format!("strip width L = {width} must be positive")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("weight rate alpha = {alpha} must be positive")));
    }
    let c0 = PI * PI / (2.0 * sigma);
    let l0 = if b <= 0.0 { None } else { Some(0.5 * (c0 / b).sqrt()) };
    let alpha0 = c0.sqrt() / (8.0 * width);
    let beta = c0 / (4.0 * width * width);
    let admissible = alpha <= alpha0 && l0.map_or(true, |l0| width < l0);
    Ok(DecayParams {
        case,
        width,
        b,
        sigma,
        c0,
        l0,
        alpha0,
        beta,
        alpha,
        admissible,
        epsilon0_policy: EPSILON0_POLICY.to_string(),
    })
}

/// Samples used by [`fit_decay`]: `t ∈ [t_min, t_max]` and `E ≥ floor·E₀`.
///
/// The floor keeps the fit out of the round-off plateau reached once the
/// weighted energy has decayed by many orders of magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub floor: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            t_min: 0.0,
            t_max: f64::INFINITY,
            floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `γ` in `E ≈ C e^{−γt}` (least squares on `log E`).
    pub gamma: f64,
    pub log_intercept: f64,
    pub points: usize,
    /// Rate used for the bound check.
    pub rate: f64,
    pub tolerance: f64,
    /// `max_i E_i / (E₀ e^{−rate·t_i})` over the whole series.
    pub worst_bound_ratio: f64,
    pub bound_ok: bool,
}

/// Fits `γ` on the window and checks `E_i ≤ E₀ e^{−rate·t_i}(1 + tol)` at
/// every sample of the series.
pub fn fit_decay(series: &[(f64, f64)], window: FitWindow, rate: f64, tol: f64) -> Result<DecayFit> {
    let (t0, e0) = *series.first().ok_or_else(|| Error::Fit("empty series".into()))?;
    if !(e0 > 0.0) {
        return Err(Error::Fit(format!("E(t₀) = {e0} is not positive")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, e)| *t >= window.t_min && *t <= window.t_max && *e >= window.floor * e0)
        .copied()
        .collect();
    if let Some((t, e)) = pts.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::Fit(format!("nonpositive energy {e} at t = {t}")));
    }
    if pts.len() < 2 {
        return Err(Error::Fit(format!("window holds {} samples, need 2", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in &pts {
        sxy += (t - mt) * (e.ln() - ml);
        sxx += (t - mt) * (t - mt);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("window samples share one time".into()));
    }
    let slope = sxy / sxx;
    let worst_bound_ratio = series
        .iter()
        .map(|(t, e)| e / (e0 * (-rate * (t - t0)).exp()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        gamma: -slope,
        log_intercept: ml - slope * mt,
        points: pts.len(),
        rate,
        tolerance: tol,
        worst_bound_ratio,
        bound_ok: worst_bound_ratio <= 1.0 + tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    /// Largest `(Ẽ_{i+1} − Ẽ_i)/Ẽ_i` with `Ẽ = e^{rate·t}E`, over steps whose
    /// energy stays above `floor·E₀`.
    pub max_relative_increase: f64,
    /// Largest `(Ẽ_{i+1} − Ẽ_i)/Ẽ₀` over all steps.
    pub max_increase_vs_initial: f64,
    pub steps_checked: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Per-step monotonicity of the rescaled series `e^{rate·t}E(t)`.
pub fn monotone_check(series: &[(f64, f64)], rate: f64, tol: f64, floor: f64) -> Result<MonotoneReport> {
    let (t0, e0) = *series.first().ok_or_else(|| Error::Fit("empty series".into()))?;
    if !(e0 > 0.0) {
        return Err(Error::Fit(format!("E(t₀) = {e0} is not positive")));
    }
    let scaled: Vec<(f64, f64)> = series
        .iter()
        .map(|(t, e)| (*e, e * (rate * (t - t0)).exp()))
        .collect();
    let (mut rel, mut vs0, mut checked) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
    for w in scaled.windows(2) {
        let (e_a, s_a) = w[0];
        let (e_b, s_b) = w[1];
        vs0 = vs0.max((s_b - s_a) / e0);
        if e_a >= floor * e0 && e_b >= floor * e0 && s_a > 0.0 {
            rel = rel.max((s_b - s_a) / s_a);
            checked += 1;
        }
    }
    Ok(MonotoneReport {
        max_relative_increase: rel,
        max_increase_vs_initial: vs0,
        steps_checked: checked,
        tolerance: tol,
        pass: rel <= tol,
    })
}
