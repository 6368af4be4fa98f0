//! Named experiments run by `zk run`.
//!
//! Each preset reads its parameters from an [`ExperimentConfig`], writes its
//! artifacts to an output directory and returns a [`Summary`] with one
//! pass/fail entry per check. Given the same configuration the summary is
//! byte-identical across runs.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use zk_core::compatibility::{phi_stack, phi_tilde_closed_form, phi_tilde_stack};
use zk_core::diagnostics::{
    bump_family, decay_params, energy_identity_residual, fit_decay, interior_norm, interpolation_ratio_monitor,
    monotone_check, steklov_check, steklov_family, weighted_norm, weighted_norm_modal, EnergyIdentity, FitWindow,
    Inequality, MonitorGrid, SteklovClass,
};
use zk_core::io::{write_frame, write_json, write_json_lines, write_snapshots_csv};
use zk_core::operators::{Field2D, GridSpec, Sponge};
use zk_core::quadrature::ChebyshevGrid;
use zk_core::solver::{
    FnForcing, FnInflow, Snapshot, Solver, SolverConfig, SolverState, StepDiagnostics, ZeroInflow,
    DEFAULT_GRID_DAMPING,
};
use zk_core::transverse::{boundary_norm, BcCase, BoundaryTrace, Eigenpair, TransverseBasis};
use zk_core::weights::WeightFunction;

use crate::config::{EquationSection, ExperimentConfig, GridSection, RunSection, WeightFamily, WeightSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    DecayA,
    DecayC,
    IdentityLinear,
    Conservation,
    CompatCheck,
    SteklovSuite,
    InterpSuite,
    InteriorReg,
    NormBench,
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::DecayA,
        Preset::DecayC,
        Preset::IdentityLinear,
        Preset::Conservation,
        Preset::CompatCheck,
        Preset::SteklovSuite,
        Preset::InterpSuite,
        Preset::InteriorReg,
        Preset::NormBench,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::DecayA => "decay_a",
            Preset::DecayC => "decay_c",
            Preset::IdentityLinear => "identity_linear",
            Preset::Conservation => "conservation",
            Preset::CompatCheck => "compat_check",
            Preset::SteklovSuite => "steklov_suite",
            Preset::InterpSuite => "interp_suite",
            Preset::InteriorReg => "interior_reg",
            Preset::NormBench => "norm_bench",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Preset::ALL.iter().map(|p| p.name()).collect()
    }

    pub fn is_decay(self) -> bool {
        matches!(self, Preset::DecayA | Preset::DecayC)
    }

    /// The desk-scale configuration of this preset.
    pub fn defaults(self) -> ExperimentConfig {
        let mut c = ExperimentConfig {
            preset: self,
            grid: GridSection {
                x_max: 30.0,
                nx: 601,
                dt: 0.005,
                sponge_start: 0.8,
                sponge_peak: 10.0,
            },
            equation: EquationSection {
                bc: BcCase::DirichletDirichlet,
                width: 1.0,
                modes: 8,
                b: 0.0,
                linear: false,
                hyperviscosity: DEFAULT_GRID_DAMPING,
            },
            weight: WeightSection {
                family: WeightFamily::Exponential,
                alpha: 0.25,
            },
            run: RunSection {
                t_final: 5.0,
                amplitude: 1e-3,
                seed: 0,
                snapshots: 0,
                cfl: 0.5,
            },
        };
        match self {
            Preset::DecayA => {}
            Preset::DecayC => {
                c.equation.bc = BcCase::DirichletNeumann;
                c.weight.alpha = 0.125;
            }
            Preset::IdentityLinear => {
                c.grid.x_max = 12.0;
                c.grid.nx = 241;
                c.grid.dt = 1e-3;
                c.equation.modes = 4;
                c.equation.linear = true;
                c.run.t_final = 0.5;
                c.run.amplitude = 1.0;
            }
            Preset::Conservation => {
                c.grid.x_max = 40.0;
                c.grid.nx = 801;
                c.grid.dt = 0.002;
                c.run.t_final = 10.0;
                c.run.amplitude = 0.1;
            }
            Preset::CompatCheck => {
                c.grid.x_max = 8.0;
                c.grid.nx = 321;
                c.grid.dt = 2e-3;
                c.equation.bc = BcCase::NeumannNeumann;
                c.equation.modes = 6;
                c.run.amplitude = 1.0;
            }
            Preset::SteklovSuite => {}
            Preset::InterpSuite => {
                c.grid.x_max = 15.0;
                c.grid.nx = 240;
            }
            Preset::InteriorReg => {
                c.grid.nx = 301;
                c.run.t_final = 2.0;
                c.run.amplitude = 0.1;
                c.weight.alpha = 0.1;
            }
            Preset::NormBench => {
                c.grid.nx = 121;
                c.run.t_final = 2.0;
                c.run.amplitude = 1.0;
            }
        }
        c
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown preset `{s}`: expected one of {}", Preset::names().join(", ")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub preset: Preset,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub config: ExperimentConfig,
    pub report: Value,
}

#[derive(Debug)]
pub enum RunError {
    Io(String),
    Run { preset: Preset, source: zk_core::Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Io(m) => write!(f, "i/o error: {m}"),
            RunError::Run { preset, source } => write!(f, "preset {preset}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

type Outcome = zk_core::Result<(Vec<Check>, Value)>;

/// Runs `cfg` and writes `summary.json`, `config.ini` and the preset's
/// artifacts into `out`.
pub fn run_preset(cfg: &ExperimentConfig, out: &Path) -> Result<Summary, RunError> {
    fs::create_dir_all(out).map_err(|e| RunError::Io(format!("{}: {e}", out.display())))?;
    let dir = Out(out.to_path_buf());
    let preset = cfg.preset;
    let result = match preset {
        Preset::DecayA | Preset::DecayC => decay(cfg, &dir),
        Preset::IdentityLinear => identity_linear(cfg, &dir),
        Preset::Conservation => conservation(cfg, &dir),
        Preset::CompatCheck => compat_check(cfg, &dir),
        Preset::SteklovSuite => steklov_suite(cfg, &dir),
        Preset::InterpSuite => interp_suite(cfg, &dir),
        Preset::InteriorReg => interior_reg(cfg, &dir),
        Preset::NormBench => norm_bench(cfg, &dir),
    };
    let (checks, report) = result.map_err(|source| match source {
        zk_core::Error::Io(m) => RunError::Io(m),
        source => RunError::Run { preset, source },
    })?;
    let summary = Summary {
        preset,
        seed: cfg.run.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
        config: cfg.clone(),
        report,
    };
    let io = |e: zk_core::Error| RunError::Io(e.to_string());
    dir.text("config.ini", &cfg.to_text()).map_err(io)?;
    dir.json("summary.json", &summary).map_err(io)?;
    Ok(summary)
}

struct Out(PathBuf);

impl Out {
    fn create(&self, name: &str) -> zk_core::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.0.join(name))?))
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, v: &T) -> zk_core::Result<()> {
        let mut w = self.create(name)?;
        write_json(&mut w, v)?;
        w.flush()?;
        Ok(())
    }

    fn jsonl<T: Serialize>(&self, name: &str, items: impl IntoIterator<Item = T>) -> zk_core::Result<()> {
        let mut w = self.create(name)?;
        write_json_lines(&mut w, items)?;
        w.flush()?;
        Ok(())
    }

    fn text(&self, name: &str, s: &str) -> zk_core::Result<()> {
        fs::write(self.0.join(name), s)?;
        Ok(())
    }
}

fn grid(cfg: &ExperimentConfig, x_max: f64, nx: usize, dt: f64) -> zk_core::Result<GridSpec> {
    let e = &cfg.equation;
    let basis = Arc::new(TransverseBasis::new(e.bc, e.width, e.modes)?);
    GridSpec::new(x_max, nx, dt, basis)?.with_sponge(Sponge {
        start: cfg.grid.sponge_start * x_max,
        peak: cfg.grid.sponge_peak,
    })
}

fn solver_config(cfg: &ExperimentConfig, grid: GridSpec, t_final: f64) -> SolverConfig {
    let mut s = SolverConfig::new(grid, cfg.equation.b, t_final);
    s.linear_only = cfg.equation.linear;
    s.hyperviscosity = cfg.equation.hyperviscosity;
    s.cfl = cfg.run.cfl;
    s
}

/// First transverse mode scaled to unit peak.
fn unit_mode(grid: &GridSpec) -> Eigenpair {
    let mut m = grid.basis().modes()[0];
    m.amplitude = 1.0;
    m
}

/// Advances `state` to `T`, calling `observe` at every step and writing
/// `diagnostics.jsonl` plus, when requested, `K` snapshots as CSV and frames.
fn drive(
    cfg: &ExperimentConfig,
    solver: &Solver,
    state: &mut SolverState,
    out: &Out,
    mut observe: impl FnMut(&SolverState),
) -> zk_core::Result<Vec<StepDiagnostics>> {
    let grid = solver.grid().clone();
    let n = solver.n_steps();
    let k = cfg.run.snapshots;
    let every = if k == 0 { 0 } else { (n / k).max(1) };
    let mut diags = Vec::with_capacity(n + 1);
    let mut snaps = Vec::new();
    solver.run_with(state, |s| {
        let field = s.field(&grid);
        diags.push(StepDiagnostics {
            t: s.t,
            l2: s.u.l2_norm_sq(&grid).sqrt(),
            max_abs: field.max_abs(),
        });
        if every > 0 && (s.step % every == 0 || s.step == n) {
            snaps.push(Snapshot { t: s.t, u: field });
        }
        observe(s);
    })?;
    out.jsonl("diagnostics.jsonl", &diags)?;
    write_snapshots(out, &grid, &snaps)?;
    Ok(diags)
}

fn write_snapshots(out: &Out, grid: &GridSpec, snaps: &[Snapshot]) -> zk_core::Result<()> {
    if snaps.is_empty() {
        return Ok(());
    }
    let mut w = out.create("snapshots.csv")?;
    write_snapshots_csv(&mut w, grid, snaps)?;
    w.flush()?;
    let mut w = out.create("frames.bin")?;
    for s in snaps {
        write_frame(&mut w, s.t, &s.u)?;
    }
    w.flush()?;
    Ok(())
}

fn decay(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let e = &cfg.equation;
    let params = decay_params(e.bc, e.width, e.b, cfg.weight.alpha)?;
    out.json("decay_params.json", &params)?;
    let rate = params.rate();
    let w = WeightFunction::exponential(cfg.weight.alpha)?;
    let series_for = |x_max: f64, nx: usize, sink: Option<&Out>| -> zk_core::Result<Vec<(f64, f64)>> {
        let g = grid(cfg, x_max, nx, cfg.grid.dt)?;
        let psi = unit_mode(&g);
        let amp = cfg.run.amplitude;
        let (solver, mut state) = Solver::init_fn(
            solver_config(cfg, g.clone(), cfg.run.t_final),
            |x, y| amp * (-(x - 5.0).powi(2)).exp() * psi.value(y),
            ZeroInflow,
        )?;
        let mut series = Vec::with_capacity(solver.n_steps() + 1);
        let mut observe = |s: &SolverState| {
            let e = weighted_norm_modal(&s.u, &g, &w, 0).expect("order 0 is supported");
            series.push((s.t, e));
        };
        match sink {
            Some(o) => {
                drive(cfg, &solver, &mut state, o, &mut observe)?;
            }
            None => solver.run_with(&mut state, &mut observe)?,
        }
        Ok(series)
    };
    let series = series_for(cfg.grid.x_max, cfg.grid.nx, Some(out))?;
    let doubled = series_for(2.0 * cfg.grid.x_max, 2 * cfg.grid.nx - 1, None)?;
    let window = FitWindow {
        floor: 1e-8,
        ..FitWindow::default()
    };
    let fit = fit_decay(&series, window, rate, 0.05)?;
    let fit2 = fit_decay(&doubled, window, rate, 0.05)?;
    let mono = monotone_check(&series, rate, 1e-6, window.floor)?;
    let change = (fit2.gamma - fit.gamma).abs() / fit.gamma.abs();
    out.jsonl(
        "decay_series.jsonl",
        series
            .iter()
            .map(|(t, e)| json!({"t": t, "energy": e, "rescaled": e * (rate * t).exp()})),
    )?;
    out.json("decay_fit.json", &json!({"fit": fit, "fit_doubled": fit2, "monotone": mono}))?;
    let checks = vec![
        Check::at_most("rescaled energy non-increasing per step", mono.max_relative_increase, 1e-6),
        Check::at_most("decay bound ratio", fit.worst_bound_ratio, 1.05),
        Check::at_most("fitted exponent change under X_max doubling", change, 0.01),
    ];
    let report = json!({
        "params": params,
        "rate": rate,
        "gamma": fit.gamma,
        "gamma_doubled": fit2.gamma,
        "margin": fit.gamma / rate,
        "fit_points": fit.points,
    });
    Ok((checks, report))
}

/// Linear run with exact solution `A e^{−t} e^{−(x−3)²} ψ(y)`; forcing and
/// inflow are computed from it.
fn manufactured(
    cfg: &ExperimentConfig,
    nx: usize,
    dt: f64,
    t_final: f64,
) -> zk_core::Result<(SolverConfig, impl Fn(f64, f64, f64) -> f64 + Send + Sync + Copy + 'static)> {
    let g = grid(cfg, cfg.grid.x_max, nx, dt)?;
    let psi = unit_mode(&g);
    let lam = psi.lambda;
    let b = cfg.equation.b;
    let amp = cfg.run.amplitude;
    let exact = move |t: f64, x: f64, y: f64| amp * (-t).exp() * (-(x - 3.0).powi(2)).exp() * psi.value(y);
    let forcing = move |t: f64, x: f64, y: f64| {
        let s = x - 3.0;
        let e = (-s * s).exp();
        let (g1, g3) = (-2.0 * s * e, (12.0 * s - 8.0 * s * s * s) * e);
        amp * (-t).exp() * (-e + (b - lam) * g1 + g3) * psi.value(y)
    };
    let mut sc = solver_config(cfg, g, t_final).with_forcing(FnForcing(forcing));
    sc.linear_only = true;
    Ok((sc, exact))
}

fn identity_linear(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let weights = [("constant", WeightFunction::constant()), ("configured", cfg.weight.function()?)];
    let (nx0, dt0) = (cfg.grid.nx, cfg.grid.dt);
    let levels = [(nx0, dt0), (2 * nx0 - 1, dt0 / 2.0), (4 * nx0 - 3, dt0 / 4.0)];
    let mut relative = [[0.0; 3]; 2];
    let mut absolute = [[0.0; 3]; 2];
    let mut reports = Vec::new();
    for (level, (nx, dt)) in levels.into_iter().enumerate() {
        let (mut sc, exact) = manufactured(cfg, nx, dt, cfg.run.t_final)?;
        sc.snapshot_every = 1;
        let (solver, mut state) = Solver::init_fn(sc, |x, y| exact(0.0, x, y), FnInflow(move |t, y| exact(t, 0.0, y)))?;
        let traj = solver.run(&mut state)?;
        if level == 0 {
            out.jsonl("diagnostics.jsonl", &traj.diagnostics)?;
            let k = cfg.run.snapshots;
            if k > 0 {
                let n = traj.snapshots.len() - 1;
                let every = (n / k).max(1);
                let picked: Vec<Snapshot> = traj
                    .snapshots
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % every == 0 || *i == n)
                    .map(|(_, s)| s.clone())
                    .collect();
                write_snapshots(out, solver.grid(), &picked)?;
            }
        }
        for (k, (name, w)) in weights.iter().enumerate() {
            let r = energy_identity_residual(&traj.snapshots, solver.config(), *w, EnergyIdentity::L2, None)?;
            relative[k][level] = r.relative_residual;
            absolute[k][level] = r.max_residual;
            if level == 0 {
                out.json(&format!("energy_report_{name}.json"), &r)?;
            }
            reports.push(json!({"nx": nx, "dt": dt, "weight": name, "relative_residual": r.relative_residual, "max_residual": r.max_residual}));
        }
    }
    let mut checks = Vec::new();
    for (k, (name, _)) in weights.iter().enumerate() {
        checks.push(Check::at_most(&format!("coarse relative residual ({name} weight)"), relative[k][0], 0.05));
        for level in 1..3 {
            let rate = (absolute[k][level - 1] / absolute[k][level]).log2();
            checks.push(Check::at_least(&format!("residual order, level {level} ({name} weight)"), rate, 1.8));
        }
    }
    Ok((checks, json!({"levels": reports})))
}

fn conservation(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let g = grid(cfg, cfg.grid.x_max, cfg.grid.nx, cfg.grid.dt)?;
    let psi = unit_mode(&g);
    let amp = cfg.run.amplitude;
    let (solver, mut state) = Solver::init_fn(
        solver_config(cfg, g.clone(), cfg.run.t_final),
        |x, y| amp * (-(x - 10.0).powi(2)).exp() * psi.value(y),
        ZeroInflow,
    )?;
    let n0 = state.u.l2_norm_sq(&g).sqrt();
    let (mut prev, mut growth, mut step_growth) = (n0, f64::NEG_INFINITY, f64::NEG_INFINITY);
    drive(cfg, &solver, &mut state, out, |s| {
        let n = s.u.l2_norm_sq(&g).sqrt();
        growth = growth.max((n - n0) / n0);
        if s.step > 0 {
            step_growth = step_growth.max((n - prev) / prev);
        }
        prev = n;
    })?;
    let checks = vec![
        Check::at_most("max relative norm growth", growth, 1e-6),
        Check::at_most("max per-step relative growth", step_growth, 1e-8),
    ];
    Ok((
        checks,
        json!({"initial_norm": n0, "final_norm": prev, "steps": solver.n_steps(), "max_relative_growth": growth}),
    ))
}

fn compat_check(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let b = cfg.equation.b;
    let amp = cfg.run.amplitude;
    let mut checks = Vec::new();

    // Φ_1 of u₀ = A e^{−x} ψ̂(y) is (1 + b − λ) A e^{−x} ψ̂ + A² e^{−2x} ψ̂²
    let phi1_error = |nx: usize| -> zk_core::Result<f64> {
        let g = grid(cfg, cfg.grid.x_max, nx, cfg.grid.dt)?;
        let psi = unit_mode(&g);
        let lam = psi.lambda;
        let u0 = Field2D::from_fn(&g, |x, y| amp * (-x).exp() * psi.value(y));
        let stack = phi_stack(&u0, &g, b, 1, true)?;
        if nx == cfg.grid.nx {
            let mut w = out.create("compat_stack.csv")?;
            stack.write_csv(&g, &mut w)?;
            w.flush()?;
        }
        let exact = Field2D::from_fn(&g, |x, y| {
            let p = psi.value(y);
            (1.0 + b - lam) * amp * (-x).exp() * p + amp * amp * (-2.0 * x).exp() * p * p
        });
        Ok(stack.phi(1).axpy(-1.0, &exact)?.l2_norm(&g) / exact.l2_norm(&g))
    };
    let e1 = phi1_error(cfg.grid.nx)?;
    let e2 = phi1_error(2 * cfg.grid.nx - 1)?;
    checks.push(Check::at_most("Φ_1 relative error (coarse)", e1, 0.02));
    checks.push(Check::at_least("Φ_1 convergence order", (e1 / e2).log2(), 1.8));

    let g = grid(cfg, cfg.grid.x_max, cfg.grid.nx, cfg.grid.dt)?;
    let psi = unit_mode(&g);
    let u0 = Field2D::from_fn(&g, |x, y| amp * (-(x - 2.0).powi(2)).exp() * psi.value(y));
    let f_derivs: Vec<Field2D> = (0..3)
        .map(|l| Field2D::from_fn(&g, |x, y| (-(x - 2.5 - 0.3 * l as f64).powi(2)).exp() * psi.value(y) / (1.0 + l as f64)))
        .collect();
    let stack = phi_tilde_stack(&u0, &f_derivs, &g, b, 3)?;
    let mut gap = 0.0f64;
    for m in 0..=3 {
        let closed = phi_tilde_closed_form(&u0, &f_derivs, &g, b, m)?;
        let scale = closed.max_abs().max(1e-300);
        gap = gap.max(stack.phi(m).axpy(-1.0, &closed)?.max_abs() / scale);
    }
    checks.push(Check::at_most("recursion vs closed form (relative)", gap, 1e-10));

    // (u(Δt) − u(0))/Δt against Φ̃_1 on three refinements
    let mut levels = Vec::new();
    for k in 0..3 {
        let scale = 1usize << k;
        let nx = (cfg.grid.nx - 1) / 2 * scale + 1;
        let dt = 2.0 * cfg.grid.dt / scale as f64;
        let (sc, exact) = manufactured(cfg, nx, dt, dt)?;
        let g = sc.grid.clone();
        let forcing = sc.forcing.clone().expect("manufactured runs are forced");
        let (solver, mut state) = Solver::init_fn(sc, |x, y| exact(0.0, x, y), FnInflow(move |t, y| exact(t, 0.0, y)))?;
        let u0 = state.field(&g);
        solver.step(&mut state)?;
        let quotient = state.field(&g).axpy(-1.0, &u0)?.scaled(1.0 / solver.dt());
        let tilde = phi_tilde_stack(&u0, &[forcing.sample(0.0, &g)], &g, b, 1)?;
        let r = quotient.axpy(-1.0, tilde.phi(1))?.l2_norm(&g) / tilde.phi(1).l2_norm(&g);
        levels.push(json!({"nx": nx, "dt": solver.dt(), "residual": r}));
        if k > 0 {
            let prev = levels[k - 1]["residual"].as_f64().unwrap_or(f64::NAN);
            checks.push(Check::at_least(
                &format!("consistency residual reduction, level {k}"),
                prev / r,
                1.6,
            ));
        }
    }
    Ok((
        checks,
        json!({"phi1_error": [e1, e2], "closed_form_gap": gap, "consistency": levels}),
    ))
}

fn steklov_suite(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let width = cfg.equation.width;
    let cheb = ChebyshevGrid::new(64, width);
    let mut checks = Vec::new();
    let mut report = serde_json::Map::new();
    for class in [SteklovClass::BothEnds, SteklovClass::LeftEnd] {
        let tag = match class {
            SteklovClass::BothEnds => "both_ends",
            SteklovClass::LeftEnd => "left_end",
        };
        let ratios = steklov_family(class, &cheb, 500, cfg.run.seed)
            .iter()
            .map(|psi| steklov_check(psi, &cheb, class))
            .collect::<zk_core::Result<Vec<f64>>>()?;
        let worst = ratios.iter().fold(0.0f64, |m, r| m.max(*r));
        let k = match class {
            SteklovClass::BothEnds => std::f64::consts::PI / width,
            SteklovClass::LeftEnd => std::f64::consts::PI / (2.0 * width),
        };
        let ext: Vec<f64> = cheb.nodes.iter().map(|y| (k * y).sin()).collect();
        let extremal = steklov_check(&ext, &cheb, class)?;
        checks.push(Check::at_most(&format!("max ratio, {tag} (500 samples)"), worst, 1.0 + 1e-8));
        checks.push(Check::at_most(&format!("extremal ratio deviation, {tag}"), (extremal - 1.0).abs(), 1e-10));
        out.jsonl(&format!("steklov_{tag}.jsonl"), &ratios)?;
        report.insert(tag.into(), json!({"max_ratio": worst, "extremal": extremal, "count": ratios.len()}));
    }
    Ok((checks, Value::Object(report)))
}

fn interp_suite(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let e = &cfg.equation;
    let w = cfg.weight.function()?;
    let family = bump_family(e.bc, e.width, 200, cfg.run.seed)?;
    let base = MonitorGrid {
        x_max: cfg.grid.x_max,
        width: e.width,
        x_panels: (cfg.grid.nx / 4).max(1),
        y_points: 2 * e.modes,
    };
    let mut checks = Vec::new();
    let mut report = serde_json::Map::new();
    for ineq in Inequality::ALL {
        let coarse = interpolation_ratio_monitor(&family[..100], ineq, &w, &w, base);
        let fine = interpolation_ratio_monitor(&family[..100], ineq, &w, &w, base.refined());
        let doubled = interpolation_ratio_monitor(&family, ineq, &w, &w, base);
        let grid_change = (fine.max_ratio / coarse.max_ratio - 1.0).abs();
        let family_change = (doubled.max_ratio / coarse.max_ratio - 1.0).abs();
        checks.push(Check::at_most(&format!("{ineq}: change under grid doubling"), grid_change, 0.05));
        checks.push(Check::at_most(&format!("{ineq}: change under family doubling"), family_change, 0.05));
        out.jsonl(&format!("interp_{ineq}.jsonl"), &doubled.ratios)?;
        report.insert(
            ineq.tag().into(),
            json!({"max_ratio": coarse.max_ratio, "max_ratio_refined": fine.max_ratio, "max_ratio_200": doubled.max_ratio}),
        );
    }
    Ok((checks, Value::Object(report)))
}

/// Bound on interior norms, as a multiple of their largest initial value.
const INTERIOR_BOUND_FACTOR: f64 = 10.0;

fn interior_reg(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let g = grid(cfg, cfg.grid.x_max, cfg.grid.nx, cfg.grid.dt)?;
    let psi = unit_mode(&g);
    let amp = cfg.run.amplitude;
    let w = cfg.weight.function()?;
    let (solver, mut state) = Solver::init_fn(
        solver_config(cfg, g.clone(), cfg.run.t_final),
        |x, y| amp * (-(x - 5.0).powi(2)).exp() * psi.value(y),
        ZeroInflow,
    )?;
    let (x0, y0) = (1.0, 0.1 * cfg.equation.width);
    let orders = [(0, 0), (1, 0), (2, 0)];
    let mut rows: Vec<(f64, [f64; 3])> = Vec::new();
    let mut fields = Vec::new();
    let n = solver.n_steps();
    let every = (n / 20).max(1);
    drive(cfg, &solver, &mut state, out, |s| {
        if s.step % every == 0 || s.step == n {
            fields.push((s.t, s.field(&g)));
        }
    })?;
    for (t, u) in &fields {
        let mut v = [0.0; 3];
        for (k, a) in orders.iter().enumerate() {
            v[k] = interior_norm(u, &g, x0, y0, &w, *a)?;
        }
        rows.push((*t, v));
    }
    out.jsonl(
        "interior_norms.jsonl",
        rows.iter().map(|(t, v)| json!({"t": t, "dx0": v[0], "dx1": v[1], "dx2": v[2]})),
    )?;
    let mut checks = Vec::new();
    for k in 0..3 {
        let initial = rows[0].1[k];
        let peak = rows.iter().fold(0.0f64, |m, r| m.max(r.1[k]));
        checks.push(Check::at_most(
            &format!("interior norm of ∂_x^{k} u over initial value"),
            peak / initial,
            INTERIOR_BOUND_FACTOR,
        ));
    }
    Ok((checks, json!({"x0": x0, "y0": y0, "samples": rows.len()})))
}

fn norm_bench(cfg: &ExperimentConfig, out: &Out) -> Outcome {
    let g = grid(cfg, cfg.grid.x_max, cfg.grid.nx, cfg.grid.dt)?;
    let psi = unit_mode(&g);
    let amp = cfg.run.amplitude;
    let t_final = cfg.run.t_final;
    let mu = BoundaryTrace::from_fn(g.basis_arc(), t_final, cfg.grid.nx, |t, y| {
        amp * (std::f64::consts::PI * t / t_final).sin() * (-t).exp() * psi.value(y)
    })?;
    let l2 = mu.l2_norm();
    let norms: Vec<(f64, f64)> = [0.0, 1.0, 4.0].iter().map(|&s| (s, boundary_norm(&mu, s))).collect();
    let u0 = Field2D::from_fn(&g, |x, y| amp * (-(x - 5.0).powi(2)).exp() * psi.value(y));
    let w = cfg.weight.function()?;
    let weighted = (0..=2)
        .map(|k| weighted_norm(&u0, &g, &w, k))
        .collect::<zk_core::Result<Vec<f64>>>()?;
    out.jsonl("boundary_norms.jsonl", norms.iter().map(|(s, n)| json!({"s": s, "norm": n})))?;
    let checks = vec![Check::at_most(
        "s = 0 norm vs space-time L2 (relative)",
        (norms[0].1 - l2).abs() / l2,
        1e-8,
    )];
    Ok((
        checks,
        json!({"l2": l2, "boundary_norms": norms, "weighted_norms_u0": weighted}),
    ))
}
