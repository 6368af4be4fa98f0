//! IMEX time stepping on the truncated half-strip.
//!
//! Each transverse mode evolves under Crank–Nicolson for `A_l` plus the
//! sponge, with `u u_x` extrapolated by two-step Adams–Bashforth (forward
//! Euler on the first step) and the forcing averaged over the step.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{crank_nicolson_pair, nonlinear_modal, BandedMatrix, Field2D, GridSpec, ModalField};
use crate::quadrature::gauss_legendre;
use crate::transverse::{BcCase, BoundaryTrace, TransverseBasis};

/// Source term `f(t, x, y)` of the linear equation.
pub trait Forcing: Send + Sync {
    fn sample(&self, t: f64, grid: &GridSpec) -> Field2D;
}

/// Forcing given by a closure.
pub struct FnForcing<F>(pub F);

impl<F: Fn(f64, f64, f64) -> f64 + Send + Sync> Forcing for FnForcing<F> {
    fn sample(&self, t: f64, grid: &GridSpec) -> Field2D {
        Field2D::from_fn(grid, |x, y| (self.0)(t, x, y))
    }
}

/// Forcing frames on a uniform time grid, linearly interpolated.
#[derive(Debug, Clone)]
pub struct ForcingSeries {
    pub dt: f64,
    pub frames: Vec<Field2D>,
}

impl Forcing for ForcingSeries {
    fn sample(&self, t: f64, _grid: &GridSpec) -> Field2D {
        let last = self.frames.len() - 1;
        let s = (t / self.dt).clamp(0.0, last as f64);
        let i = (s.floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return self.frames[0].clone();
        }
        let th = s - i as f64;
        self.frames[i]
            .scaled(1.0 - th)
            .axpy(th, &self.frames[i + 1])
            .expect("frames share a shape")
    }
}

/// Inflow data `μ(t, ·)` at `x = 0`, as transverse mode coefficients.
pub trait Inflow: Send + Sync {
    fn modal(&self, t: f64, basis: &TransverseBasis) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroInflow;

impl Inflow for ZeroInflow {
    fn modal(&self, _t: f64, basis: &TransverseBasis) -> Vec<f64> {
        vec![0.0; basis.n_modes()]
    }
}

impl Inflow for BoundaryTrace {
    fn modal(&self, t: f64, basis: &TransverseBasis) -> Vec<f64> {
        basis.forward(&self.at(t)).expect("trace shares the solver basis")
    }
}

/// Inflow given by a closure `μ(t, y)`.
pub struct FnInflow<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Inflow for FnInflow<F> {
    fn modal(&self, t: f64, basis: &TransverseBasis) -> Vec<f64> {
        let s: Vec<f64> = basis.nodes().iter().map(|&y| (self.0)(t, y)).collect();
        basis.forward(&s).expect("node count matches")
    }
}

#[derive(Clone)]
pub struct SolverConfig {
    pub b: f64,
    pub grid: GridSpec,
    pub t_final: f64,
    pub linear_only: bool,
    /// `C_cfl` in `Δt ≤ C_cfl·Δx/max|u|`.
    pub cfl: f64,
    /// Coefficient `ε` of the optional `ε Δx³ δ⁴` grid-scale damping.
    pub hyperviscosity: f64,
    pub forcing: Option<Arc<dyn Forcing>>,
    /// Record a snapshot every this many steps (0 keeps only the ends).
    pub snapshot_every: usize,
}

impl fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("b", &self.b)
            .field("grid", &self.grid)
            .field("t_final", &self.t_final)
            .field("linear_only", &self.linear_only)
            .field("cfl", &self.cfl)
            .field("hyperviscosity", &self.hyperviscosity)
            .field("forcing", &self.forcing.is_some())
            .field("snapshot_every", &self.snapshot_every)
            .finish()
    }
}

impl SolverConfig {
    pub fn new(grid: GridSpec, b: f64, t_final: f64) -> Self {
        SolverConfig {
            b,
            grid,
            t_final,
            linear_only: false,
            cfl: 0.5,
            hyperviscosity: DEFAULT_GRID_DAMPING,
            forcing: None,
            snapshot_every: 0,
        }
    }

    pub fn linear(mut self) -> Self {
        self.linear_only = true;
        self
    }

    pub fn with_forcing(mut self, f: impl Forcing + 'static) -> Self {
        self.forcing = Some(Arc::new(f));
        self
    }

    pub fn case(&self) -> BcCase {
        self.grid.basis().case()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("T = {} must be nonnegative", self.t_final)));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("CFL constant {} must be positive", self.cfl)));
        }
        if !(self.hyperviscosity >= 0.0) {
            return Err(Error::Config("hyperviscosity must be nonnegative".into()));
        }
        Ok(())
    }

    /// Step count and the step actually used so that `n·Δt = T` exactly.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.grid.dt);
        }
        let n = (self.t_final / self.grid.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub u: ModalField,
    prev_nonlinear: Option<ModalField>,
    prev_forcing: Option<ModalField>,
}

impl SolverState {
    pub fn field(&self, grid: &GridSpec) -> Field2D {
        self.u.to_field(grid)
    }
}

/// What `init` found out about the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct InitReport {
    /// Relative `L₂` distance between `u₀` and its transverse projection.
    pub projection_residual: f64,
    /// `‖u₀(0,·) − μ(0,·)‖_{L₂(0,L)}`.
    pub compatibility_residual: f64,
}

struct ModeSystem {
    lhs: BandedMatrix,
    rhs: BandedMatrix,
}

pub struct Solver {
    config: SolverConfig,
    dt: f64,
    n_steps: usize,
    systems: Vec<ModeSystem>,
    inflow: Arc<dyn Inflow>,
    report: InitReport,
}

/// Default `ε` of the grid-scale damping. Centered third derivatives carry
/// parasitic modes near `kΔx = π` that travel right at speed `≥ λ_l`; this
/// strength removes them before exponential weights can amplify them.
pub const DEFAULT_GRID_DAMPING: f64 = 0.1;

/// Tolerance above which `init` warns about projection or compatibility.
const WARN_TOL: f64 = 1e-8;

impl Solver {
    /// Builds the per-mode systems and projects nodal `u₀`.
    pub fn init(
        config: SolverConfig,
        u0: &Field2D,
        inflow: impl Inflow + 'static,
    ) -> Result<(Solver, SolverState)> {
        Self::init_with_residual(config, u0, 0.0, Arc::new(inflow))
    }

    /// Samples `u₀` at the nodes and measures the projection residual on a
    /// fine Gauss–Legendre grid in `y`.
    pub fn init_fn(
        config: SolverConfig,
        u0: impl Fn(f64, f64) -> f64,
        inflow: impl Inflow + 'static,
    ) -> Result<(Solver, SolverState)> {
        let field = Field2D::from_fn(&config.grid, &u0);
        let residual = projection_residual(&config.grid, &field, &u0);
        Self::init_with_residual(config, &field, residual, Arc::new(inflow))
    }

    fn init_with_residual(
        config: SolverConfig,
        u0: &Field2D,
        projection: f64,
        inflow: Arc<dyn Inflow>,
    ) -> Result<(Solver, SolverState)> {
        config.validate()?;
        let grid = &config.grid;
        if u0.nx() != grid.nx || u0.ny() != grid.ny() {
            return Err(Error::Config(format!(
                "initial field is {}×{}, grid is {}×{}",
                u0.nx(),
                u0.ny(),
                grid.nx,
                grid.ny()
            )));
        }
        if !u0.is_finite() {
            return Err(Error::Input("initial field has non-finite samples".into()));
        }
        let (n_steps, dt) = config.steps();
        let u = ModalField::from_field(u0, grid)?;

        let basis_arc = grid.basis_arc();
        let basis: &TransverseBasis = &basis_arc;
        let mu0 = inflow.modal(0.0, basis);
        let dn = basis.discrete_norms();
        let compat = (0..basis.n_modes())
            .map(|l| dn[l] * (u.profile(l)[0] - mu0[l]).powi(2))
            .sum::<f64>()
            .sqrt();
        if projection > WARN_TOL {
            log::warn!(
                "initial data is not representable in the case-{} basis; projection residual {projection:.3e}",
                basis.case()
            );
        }
        if compat > WARN_TOL {
            log::warn!("u0(0,·) differs from μ(0,·) by {compat:.3e} in L2");
        }

        let mut cfg = config;
        cfg.grid.dt = dt;
        let sponge = cfg.grid.sponge_profile();
        let systems = basis
            .modes()
            .par_iter()
            .map(|m| {
                let (mut lhs, rhs) =
                    crank_nicolson_pair(m.lambda, cfg.b, &cfg.grid, &sponge, cfg.hyperviscosity);
                lhs.factor()?;
                Ok(ModeSystem { lhs, rhs })
            })
            .collect::<Result<Vec<_>>>()?;

        let solver = Solver {
            dt,
            n_steps,
            systems,
            inflow,
            report: InitReport {
                projection_residual: projection,
                compatibility_residual: compat,
            },
            config: cfg,
        };
        solver.check_cfl(&u, 0.0)?;
        let state = SolverState {
            t: 0.0,
            step: 0,
            u,
            prev_nonlinear: None,
            prev_forcing: None,
        };
        Ok((solver, state))
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &GridSpec {
        &self.config.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn init_report(&self) -> InitReport {
        self.report
    }

    fn max_physical(&self, u: &ModalField) -> f64 {
        u.to_field(self.grid()).max_abs()
    }

    fn check_cfl(&self, u: &ModalField, t: f64) -> Result<()> {
        if self.config.linear_only {
            return Ok(());
        }
        let m = self.max_physical(u);
        let limit = self.config.cfl * self.grid().dx();
        if self.dt * m > limit {
            if t == 0.0 {
                return Err(Error::Config(format!(
                    "Δt = {:.3e} violates Δt ≤ {}·Δx/max|u| = {:.3e}",
                    self.dt,
                    self.config.cfl,
                    limit / m
                )));
            }
            log::warn!("CFL bound exceeded at t = {t:.4}: Δt·max|u|/Δx = {:.3}", self.dt * m / self.grid().dx());
        }
        Ok(())
    }

    fn forcing_modal(&self, t: f64) -> Option<ModalField> {
        self.config.forcing.as_ref().map(|f| {
            let s = f.sample(t, self.grid());
            ModalField::from_field(&s, self.grid()).expect("forcing is grid-shaped")
        })
    }

    /// Advances one step.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let grid = self.grid();
        let nx = grid.nx;
        let dt = self.dt;
        let t_new = state.t + dt;

        let explicit = if self.config.linear_only {
            None
        } else {
            let n = nonlinear_modal(&state.u, grid);
            let mut ext = n.clone();
            if let Some(prev) = &state.prev_nonlinear {
                for (e, (a, b)) in ext.data_mut().iter_mut().zip(n.data().iter().zip(prev.data())) {
                    *e = 1.5 * a - 0.5 * b;
                }
            }
            state.prev_nonlinear = Some(n);
            Some(ext)
        };
        let (f_old, f_new) = match &self.config.forcing {
            Some(_) => {
                let old = state
                    .prev_forcing
                    .take()
                    .or_else(|| self.forcing_modal(state.t));
                (old, self.forcing_modal(t_new))
            }
            None => (None, None),
        };
        let mu = self.inflow.modal(t_new, grid.basis());

        state
            .u
            .data_mut()
            .par_chunks_mut(nx)
            .zip(self.systems.par_iter())
            .enumerate()
            .try_for_each(|(l, (profile, sys))| -> Result<()> {
                let mut rhs = sys.rhs.matvec(profile)?;
                if let Some(e) = &explicit {
                    for (r, v) in rhs.iter_mut().zip(e.profile(l)) {
                        *r -= dt * v;
                    }
                }
                if let (Some(a), Some(b)) = (&f_old, &f_new) {
                    for ((r, p), q) in rhs.iter_mut().zip(a.profile(l)).zip(b.profile(l)) {
                        *r += 0.5 * dt * (p + q);
                    }
                }
                rhs[0] = mu[l];
                rhs[nx - 2] = 0.0;
                rhs[nx - 1] = 0.0;
                sys.lhs.solve_in_place(&mut rhs)?;
                profile.copy_from_slice(&rhs);
                Ok(())
            })?;
        state.prev_forcing = f_new;
        state.t = t_new;
        state.step += 1;

        if !state.u.is_finite() {
            let field = state.u.to_field(grid);
            let finite: Vec<f64> = field.data().iter().copied().filter(|v| v.is_finite()).collect();
            return Err(Error::BlowUp {
                t: t_new,
                max_abs: finite.iter().fold(0.0, |m, v| m.max(v.abs())),
                l2: f64::NAN,
            });
        }
        if !self.config.linear_only && state.step % 50 == 0 {
            self.check_cfl(&state.u, t_new)?;
        }
        Ok(())
    }

    /// Runs to `T`, calling `observe` after initialization and every step.
    pub fn run_with(
        &self,
        state: &mut SolverState,
        mut observe: impl FnMut(&SolverState),
    ) -> Result<()> {
        observe(state);
        while state.step < self.n_steps {
            self.step(state).map_err(|e| match e {
                Error::BlowUp { t, max_abs, .. } => Error::BlowUp {
                    t,
                    max_abs,
                    l2: f64::NAN,
                },
                other => Error::Input(format!("step {} (t = {:.4}): {other}", state.step, state.t)),
            })?;
            observe(state);
        }
        Ok(())
    }

    /// Runs to `T`, recording snapshots and per-step scalars.
    pub fn run(&self, state: &mut SolverState) -> Result<Trajectory> {
        let grid = self.grid().clone();
        let every = self.config.snapshot_every;
        let n_steps = self.n_steps;
        let mut traj = Trajectory::default();
        self.run_with(state, |s| {
            let l2 = s.u.l2_norm_sq(&grid).sqrt();
            let field = s.u.to_field(&grid);
            traj.diagnostics.push(StepDiagnostics {
                t: s.t,
                l2,
                max_abs: field.max_abs(),
            });
            let keep = s.step == 0 || s.step == n_steps || (every > 0 && s.step % every == 0);
            if keep {
                traj.snapshots.push(Snapshot { t: s.t, u: field });
            }
        })?;
        Ok(traj)
    }
}

/// Convenience wrapper: initialize from nodal data and run to `T`.
pub fn run(config: SolverConfig, u0: &Field2D, inflow: impl Inflow + 'static) -> Result<Trajectory> {
    let (solver, mut state) = Solver::init(config, u0, inflow)?;
    solver.run(&mut state)
}

/// Distance between `u₀` and its nodal interpolant in the transverse basis,
/// relative to `‖u₀‖`, on a Gauss–Legendre grid four times finer in `y`.
pub fn projection_residual(grid: &GridSpec, sampled: &Field2D, u0: impl Fn(f64, f64) -> f64) -> f64 {
    let basis = grid.basis();
    let (ys, wy) = gauss_legendre(4 * basis.n_modes().max(8), 0.0, basis.width());
    let wx = grid.x_weights();
    let mut diff = 0.0;
    let mut total = 0.0;
    let mut c = vec![0.0; basis.n_modes()];
    for i in 0..grid.nx {
        basis.forward_into(sampled.row(i), &mut c);
        let x = grid.x(i);
        for (y, w) in ys.iter().zip(&wy) {
            let exact = u0(x, *y);
            let approx = basis.evaluate(&c, *y, 0);
            diff += wx[i] * w * (exact - approx).powi(2);
            total += wx[i] * w * exact * exact;
        }
    }
    if total == 0.0 {
        diff.sqrt()
    } else {
        (diff / total).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field2D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub l2: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}
