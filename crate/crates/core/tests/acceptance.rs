//! Acceptance criteria 1–10 plus the interior-regularity monitor.
//!
//! Every test prints one `PASS`/`FAIL` line with the measured value, the
//! pinned tolerance and the wall time against its budget. Reference values
//! come from closed forms or from oracles written here, not from the
//! library routine under test.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use zk_core::compatibility::{phi_stack, phi_tilde_closed_form, phi_tilde_stack};
use zk_core::diagnostics::{
    bump_family, energy_identity_residual, interior_norm, interpolation_ratio_monitor, steklov_check,
    steklov_family, EnergyIdentity, Inequality, MonitorGrid, SteklovClass,
};
use zk_core::operators::{Field2D, GridSpec, Sponge};
use zk_core::quadrature::ChebyshevGrid;
use zk_core::solver::{FnForcing, FnInflow, Solver, SolverConfig, SolverState, ZeroInflow};
use zk_core::transverse::{boundary_norm, BcCase, BoundaryTrace, Eigenpair, ModeShape, TransverseBasis};
use zk_core::weights::WeightFunction;

fn verdict(id: &str, title: &str, pass: bool, detail: &str, started: Instant, budget: Duration) -> bool {
    let elapsed = started.elapsed();
    let ok = pass && elapsed <= budget;
    let line = format!(
        "{} criterion {id} ({title}): {detail} [{:.2} s of {} s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    // Written past the test harness capture so passing verdicts show too
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    ok
}

fn basis(case: BcCase, width: f64, modes: usize) -> Arc<TransverseBasis> {
    Arc::new(TransverseBasis::new(case, width, modes).unwrap())
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// `∬ w(x) u² dx dy`: trapezoid in `x`, the collocation rule in `y`.
fn weighted_energy(u: &Field2D, grid: &GridSpec, w: impl Fn(f64) -> f64) -> f64 {
    let wy = grid.basis().weights();
    let rows: Vec<f64> = (0..u.nx())
        .map(|i| w(grid.x(i)) * u.row(i).iter().zip(wy).map(|(v, q)| q * v * v).sum::<f64>())
        .collect();
    trapezoid(&rows, grid.dx())
}

fn energy(u: &Field2D, grid: &GridSpec) -> f64 {
    weighted_energy(u, grid, |_| 1.0)
}

/// First mode of `case` scaled to unit peak.
fn unit_mode(grid: &GridSpec) -> Eigenpair {
    let mut m = grid.basis().modes()[0];
    m.amplitude = 1.0;
    m
}

/// `∫₀^L a sin(p y + φ) · b sin(q y + χ) dy` in closed form.
fn trig_product_integral(a: (f64, f64, f64), b: (f64, f64, f64), width: f64) -> f64 {
    let cos_int = |k: f64, ph: f64| {
        if k.abs() < 1e-14 {
            width * ph.cos()
        } else {
            ((k * width + ph).sin() - ph.sin()) / k
        }
    };
    let (amp_a, p, phi) = a;
    let (amp_b, q, chi) = b;
    0.5 * amp_a * amp_b * (cos_int(p - q, phi - chi) - cos_int(p + q, phi + chi))
}

fn as_sine(m: &Eigenpair) -> (f64, f64, f64) {
    match m.shape {
        ModeShape::Sine => (m.amplitude, m.freq, 0.0),
        ModeShape::Cosine => (m.amplitude, m.freq, PI / 2.0),
        ModeShape::Constant => (m.amplitude, 0.0, PI / 2.0),
    }
}

/// Eigenvalues listed by hand for each case.
fn expected_lambda(case: BcCase, width: f64, k: usize) -> f64 {
    let f = match case {
        BcCase::DirichletDirichlet => (k + 1) as f64 * PI / width,
        BcCase::NeumannNeumann => k as f64 * PI / width,
        BcCase::DirichletNeumann => (k as f64 + 0.5) * PI / width,
        BcCase::Periodic => 2.0 * PI * ((k + 1) / 2) as f64 / width,
    };
    f * f
}

#[test]
fn criterion_01_eigensystem() {
    let started = Instant::now();
    let (mut gram, mut relation, mut bc, mut lambda) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for case in BcCase::ALL {
        for width in [0.5, 1.0, PI] {
            let b = basis(case, width, 32);
            let modes = b.modes();
            for (i, mi) in modes.iter().enumerate() {
                for (j, mj) in modes.iter().enumerate() {
                    let g = trig_product_integral(as_sine(mi), as_sine(mj), width);
                    gram = gram.max((g - if i == j { 1.0 } else { 0.0 }).abs());
                }
                lambda = lambda.max((mi.lambda - expected_lambda(case, width, i)).abs() / (1.0 + mi.lambda));
                for k in 0..=20 {
                    let y = width * k as f64 / 20.0;
                    let r = mi.eval(y, 2) + mi.lambda * mi.value(y);
                    relation = relation.max(r.abs() / (1.0 + mi.lambda));
                }
                let (v0, vl, d0, dl) = (mi.value(0.0), mi.value(width), mi.eval(0.0, 1), mi.eval(width, 1));
                let s = 1.0 + mi.freq;
                let miss = match case {
                    BcCase::DirichletDirichlet => v0.abs().max(vl.abs()),
                    BcCase::NeumannNeumann => d0.abs().max(dl.abs()) / s,
                    BcCase::DirichletNeumann => v0.abs().max(dl.abs() / s),
                    BcCase::Periodic => (v0 - vl).abs().max((d0 - dl).abs() / s),
                };
                bc = bc.max(miss);
            }
        }
    }
    let pass = gram <= 1e-10 && relation <= 1e-10 && lambda <= 1e-12 && bc <= 1e-12;
    let detail = format!(
        "Gram {gram:.2e} ≤ 1e-10, eigen-relation {relation:.2e} ≤ 1e-10, λ table {lambda:.2e}, boundary {bc:.2e}"
    );
    assert!(verdict("1", "eigensystem", pass, &detail, started, Duration::from_secs(1)));
}

#[test]
fn criterion_02_steklov() {
    let started = Instant::now();
    let width = 1.0;
    let cheb = ChebyshevGrid::new(64, width);
    let mut worst = 0.0f64;
    let mut extremal = 0.0f64;
    let mut oracle_gap = 0.0f64;
    let mut count = 0;
    for class in [SteklovClass::BothEnds, SteklovClass::LeftEnd] {
        for psi in steklov_family(class, &cheb, 500, 2024) {
            worst = worst.max(steklov_check(&psi, &cheb, class).unwrap());
            count += 1;
        }
        let (k1, shift) = match class {
            SteklovClass::BothEnds => (PI / width, 0.0),
            SteklovClass::LeftEnd => (PI / (2.0 * width), -0.5),
        };
        let ext: Vec<f64> = cheb.nodes.iter().map(|y| (k1 * y).sin()).collect();
        extremal = extremal.max((steklov_check(&ext, &cheb, class).unwrap() - 1.0).abs());
        // Sine series: ∫ψ² = (L/2)Σc², ∫ψ'² = (L/2)Σc²k², so the ratio is known exactly.
        for coeffs in [[1.0, 0.5, -0.25], [0.0, 1.0, 0.0], [0.3, -0.2, 0.9]] {
            let ks: Vec<f64> = (1..=3).map(|j| (j as f64 + shift) * PI / width).collect();
            let psi: Vec<f64> = cheb
                .nodes
                .iter()
                .map(|&y| coeffs.iter().zip(&ks).map(|(c, k)| c * (k * y).sin()).sum())
                .collect();
            let num: f64 = coeffs.iter().map(|c| c * c).sum();
            let den: f64 = coeffs.iter().zip(&ks).map(|(c, k)| c * c * k * k).sum();
            let exact = num / (class.sigma() * width * width / (PI * PI) * den);
            oracle_gap = oracle_gap.max((steklov_check(&psi, &cheb, class).unwrap() - exact).abs());
        }
    }
    let pass = count == 1000 && worst <= 1.0 + 1e-8 && extremal <= 1e-10 && oracle_gap <= 1e-10;
    let detail = format!(
        "{count} ratios, max {worst:.12} ≤ 1+1e-8; extremal |ratio−1| {extremal:.2e} ≤ 1e-10; sine-series oracle gap {oracle_gap:.2e}"
    );
    assert!(verdict("2", "Steklov inequality", pass, &detail, started, Duration::from_secs(5)));
}

/// Manufactured linear run with exact solution `e^{−t} e^{−(x−3)²} ψ(y)`.
struct Manufactured {
    config: SolverConfig,
    psi: Eigenpair,
}

impl Manufactured {
    fn new(nx: usize, dt: f64, t_final: f64) -> Self {
        let b = basis(BcCase::DirichletDirichlet, 1.0, 4);
        let psi = b.modes()[0];
        let lam = psi.lambda;
        let grid = GridSpec::new(12.0, nx, dt, b).unwrap();
        // f = u_t + u_xxx + u_xyy for b = 0
        let forcing = move |t: f64, x: f64, y: f64| {
            let s = x - 3.0;
            let g = (-s * s).exp();
            let (g1, g3) = (-2.0 * s * g, (12.0 * s - 8.0 * s.powi(3)) * g);
            (-t).exp() * (-g + g3 - lam * g1) * psi.value(y)
        };
        let config = SolverConfig::new(grid, 0.0, t_final).linear().with_forcing(FnForcing(forcing));
        Manufactured { config, psi }
    }

    fn exact(psi: Eigenpair) -> impl Fn(f64, f64, f64) -> f64 + Copy + Send + Sync + 'static {
        move |t, x, y| (-t).exp() * (-(x - 3.0) * (x - 3.0)).exp() * psi.value(y)
    }

    fn start(self) -> (Solver, SolverState) {
        let exact = Self::exact(self.psi);
        Solver::init_fn(self.config, |x, y| exact(0.0, x, y), FnInflow(move |t, y| exact(t, 0.0, y))).unwrap()
    }
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn criterion_03_linear_convergence() {
    let started = Instant::now();
    // spatial: against the exact solution at T = 1
    let mut space = Vec::new();
    for nx in [121, 241, 481] {
        let m = Manufactured::new(nx, 1e-3, 1.0);
        let psi = m.psi;
        let (solver, mut state) = m.start();
        solver.run_with(&mut state, |_| {}).unwrap();
        let g = solver.grid();
        let exact = Manufactured::exact(psi);
        let err = state.field(g).axpy(-1.0, &Field2D::from_fn(g, |x, y| exact(1.0, x, y))).unwrap();
        space.push(energy(&err, g).sqrt());
    }
    // temporal: against a Δt/8 reference on a grid where CN resolves the grid modes
    let run = |dt: f64| {
        let (solver, mut state) = Manufactured::new(61, dt, 1.0).start();
        solver.run_with(&mut state, |_| {}).unwrap();
        (state.field(solver.grid()), solver.grid().clone())
    };
    let (reference, g) = run(2.5e-4 / 8.0);
    let time: Vec<f64> = [2e-3, 1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&dt| energy(&run(dt).0.axpy(-1.0, &reference).unwrap(), &g).sqrt())
        .collect();
    let (rs, rt) = (rates(&space), rates(&time));
    let in_band = |r: &[f64]| r.iter().all(|v| (1.8..=2.2).contains(v));
    let detail = format!(
        "space errors {} orders {rs:.3?}; time errors {} orders {rt:.3?}; band [1.8, 2.2]",
        sci(&space),
        sci(&time)
    );
    assert!(verdict("3", "linear solver convergence", in_band(&rs) && in_band(&rt), &detail, started, Duration::from_secs(120)));
}

#[test]
fn criterion_04_energy_identity() {
    let started = Instant::now();
    let weights = [("ρ ≡ 1", WeightFunction::constant()), ("exp α=0.25", WeightFunction::exponential(0.25).unwrap())];
    let levels = [(241, 1e-3), (481, 5e-4), (961, 2.5e-4)];
    let mut rel = vec![Vec::new(); 2];
    let mut abs = vec![Vec::new(); 2];
    for (nx, dt) in levels {
        let mut m = Manufactured::new(nx, dt, 0.5);
        m.config.snapshot_every = 1;
        let (solver, mut state) = m.start();
        let traj = solver.run(&mut state).unwrap();
        for (k, (_, w)) in weights.iter().enumerate() {
            let r = energy_identity_residual(&traj.snapshots, solver.config(), *w, EnergyIdentity::L2, None).unwrap();
            rel[k].push(r.relative_residual);
            abs[k].push(r.max_residual);
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, (name, _)) in weights.iter().enumerate() {
        let r = rates(&abs[k]);
        pass &= rel[k][0] <= 0.05 && r.iter().all(|v| *v >= 1.8);
        parts.push(format!("{name}: coarse relative {:.2e} ≤ 5%, orders {r:.2?} ≥ 1.8", rel[k][0]));
    }
    assert!(verdict("4", "energy identity", pass, &parts.join("; "), started, Duration::from_secs(120)));
}

#[test]
fn criterion_05_conservation() {
    let started = Instant::now();
    let grid = GridSpec::new(40.0, 801, 0.002, basis(BcCase::DirichletDirichlet, 1.0, 8)).unwrap();
    let psi = unit_mode(&grid);
    let config = SolverConfig::new(grid.clone(), 0.0, 10.0);
    let (solver, mut state) =
        Solver::init_fn(config, |x, y| 0.1 * (-(x - 10.0).powi(2)).exp() * psi.value(y), ZeroInflow).unwrap();
    let n0 = energy(&state.field(&grid), &grid).sqrt();
    let mut worst = f64::NEG_INFINITY;
    solver
        .run_with(&mut state, |s| worst = worst.max(energy(&s.field(&grid), &grid).sqrt() / n0 - 1.0))
        .unwrap();
    let steps = solver.n_steps();
    let detail = format!("{steps} steps, max (‖u(t)‖ − ‖u₀‖)/‖u₀‖ = {worst:.3e} ≤ 1e-6");
    assert!(verdict("5", "conservation", steps == 5000 && worst <= 1e-6, &detail, started, Duration::from_secs(120)));
}

/// Least-squares slope of `−log E` over `E ≥ floor`.
fn fitted_exponent(series: &[(f64, f64)], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = series.iter().filter(|p| p.1 >= floor).map(|&(t, e)| (t, e.ln())).collect();
    let n = pts.len() as f64;
    let (mt, me) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mt) * (p.1 - me), a.1 + (p.0 - mt).powi(2)));
    -num / den
}

struct DecayOutcome {
    ok: bool,
    detail: String,
}

/// Decay run for case a or c: `‖e^{αx}u(t)‖²` on X_max and 2·X_max.
fn decay_case(case: BcCase, alpha: f64, beta: f64) -> DecayOutcome {
    let series = |x_max: f64, nx: usize| {
        let grid = GridSpec::new(x_max, nx, 0.005, basis(case, 1.0, 8))
            .unwrap()
            .with_sponge(Sponge::default_for(x_max))
            .unwrap();
        let psi = unit_mode(&grid);
        let config = SolverConfig::new(grid.clone(), 0.0, 5.0);
        let (solver, mut state) =
            Solver::init_fn(config, |x, y| 1e-3 * (-(x - 5.0).powi(2)).exp() * psi.value(y), ZeroInflow).unwrap();
        let mut out = Vec::new();
        solver
            .run_with(&mut state, |s| {
                out.push((s.t, weighted_energy(&s.field(&grid), &grid, |x| (2.0 * alpha * x).exp())))
            })
            .unwrap();
        out
    };
    let base = series(30.0, 601);
    let doubled = series(60.0, 1201);
    let e0 = base[0].1;
    let floor = 1e-8 * e0;
    let rescaled: Vec<(f64, f64)> = base.iter().map(|&(t, e)| (t, e * (alpha * beta * t).exp())).collect();
    let (mut step_floor, mut step_all) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for w in rescaled.windows(2).zip(base.windows(2)) {
        let inc = (w.0[1].1 - w.0[0].1) / w.0[0].1;
        step_all = step_all.max(inc);
        if w.1[1].1 >= floor {
            step_floor = step_floor.max(inc);
        }
    }
    let bound = rescaled.iter().fold(0.0f64, |m, p| m.max(p.1 / e0));
    let (g1, g2) = (fitted_exponent(&base, floor), fitted_exponent(&doubled, floor));
    let change = (g2 - g1).abs() / g1.abs();
    DecayOutcome {
        ok: step_floor <= 1e-6 && bound <= 1.05 && change < 0.01,
        detail: format!(
            "case {case} α={alpha} αβ={:.5}: (i) max per-step rise {step_floor:.2e} ≤ 1e-6 (all steps incl. below 1e-8·E₀: {step_all:.2e}); (ii) max E·e^{{αβt}}/E₀ {bound:.6} ≤ 1.05; (iii) γ {g1:.5} vs {g2:.5}, change {change:.2e} < 1%",
            alpha * beta
        ),
    }
}

#[test]
fn criterion_06_decay() {
    let started = Instant::now();
    // β = c₀/(4L²) with c₀ = π²/(2σ): σ = 1 for case a, σ = 4 for case c
    let beta_a = PI * PI / 8.0;
    let beta_c = PI * PI / 32.0;
    let alpha0 = |c0: f64| c0.sqrt() / 8.0;
    assert!((alpha0(PI * PI / 2.0) - 0.27768).abs() < 1e-5);
    let a = decay_case(BcCase::DirichletDirichlet, 0.25, beta_a);
    // α = 0.25 exceeds α₀ ≈ 0.13884 for case c; the largest quarter-step below it is used
    assert!(0.125 < alpha0(PI * PI / 8.0));
    let c = decay_case(BcCase::DirichletNeumann, 0.125, beta_c);
    let detail = format!("{}; {}", a.detail, c.detail);
    assert!(verdict("6", "exponential decay", a.ok && c.ok, &detail, started, Duration::from_secs(600)));
}

#[test]
fn criterion_07_compatibility() {
    let started = Instant::now();
    let grid = |nx: usize| GridSpec::new(8.0, nx, 1e-3, basis(BcCase::NeumannNeumann, 1.0, 6)).unwrap();
    // u₀ = e^{−x}, b = 0: Φ₁ = −u₀''' − u₀u₀' = e^{−x} + e^{−2x}
    let phi1_error = |nx: usize| {
        let g = grid(nx);
        let u0 = Field2D::from_fn(&g, |x, _| (-x).exp());
        let stack = phi_stack(&u0, &g, 0.0, 1, true).unwrap();
        let exact = Field2D::from_fn(&g, |x, _| (-x).exp() + (-2.0 * x).exp());
        (energy(&stack.phi(1).axpy(-1.0, &exact).unwrap(), &g) / energy(&exact, &g)).sqrt()
    };
    let e = [phi1_error(161), phi1_error(321), phi1_error(641)];
    let phi_rates = rates(&e);

    let g = grid(321);
    let psi = g.basis().modes()[1];
    let u0 = Field2D::from_fn(&g, |x, y| (-(x - 2.0).powi(2)).exp() * (1.0 + 0.3 * psi.value(y)));
    let f: Vec<Field2D> = (0..3)
        .map(|l| Field2D::from_fn(&g, |x, y| (-(x - 3.0).powi(2)).exp() * psi.value(y) * (l as f64 + 1.0)))
        .collect();
    let stack = phi_tilde_stack(&u0, &f, &g, 0.7, 3).unwrap();
    let mut gap = 0.0f64;
    for m in 0..=3 {
        let closed = phi_tilde_closed_form(&u0, &f, &g, 0.7, m).unwrap();
        gap = gap.max(stack.phi(m).axpy(-1.0, &closed).unwrap().max_abs() / closed.max_abs());
    }

    // (u(Δt) − u₀)/Δt − Φ̃₁ under joint refinement Δx, Δt → /2
    let mut consistency = Vec::new();
    for (nx, dt) in [(121, 4e-3), (241, 2e-3), (481, 1e-3)] {
        let m = Manufactured::new(nx, dt, dt);
        let forcing = m.config.forcing.clone().unwrap();
        let (solver, mut state) = m.start();
        let g = solver.grid().clone();
        let u0 = state.field(&g);
        solver.step(&mut state).unwrap();
        let quotient = state.field(&g).axpy(-1.0, &u0).unwrap().scaled(1.0 / solver.dt());
        let tilde = phi_tilde_stack(&u0, &[forcing.sample(0.0, &g)], &g, 0.0, 1).unwrap();
        let r = quotient.axpy(-1.0, tilde.phi(1)).unwrap();
        consistency.push((energy(&r, &g) / energy(tilde.phi(1), &g)).sqrt());
    }
    let c_rates = rates(&consistency);
    let pass = e[0] <= 0.02
        && phi_rates.iter().all(|r| *r >= 1.8)
        && gap <= 1e-10
        && c_rates.iter().all(|r| *r >= 0.9);
    let detail = format!(
        "Φ₁ errors {} (coarse ≤ 2%), orders {phi_rates:.2?} ≥ 1.8; recursion vs closed form {gap:.2e} ≤ 1e-10; consistency residuals {}, orders {c_rates:.2?} ≥ 0.9 (first order or better)",
        sci(&e),
        sci(&consistency)
    );
    assert!(verdict("7", "compatibility", pass, &detail, started, Duration::from_secs(60)));
}

/// The norm of a separable trace `g(t)ψ₁(y)` from a direct DFT of `g`.
fn separable_norm_oracle(g: &[f64], dt: f64, norm_index: i64, s: f64) -> f64 {
    let n = g.len();
    let m = 2 * n;
    let mut total = 0.0;
    for k in 0..m {
        let kk = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
        let theta = 2.0 * PI * kk / (m as f64 * dt);
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in g.iter().enumerate() {
            let ph = theta * i as f64 * dt;
            re += dt * v * ph.cos();
            im -= dt * v * ph.sin();
        }
        let w = (theta.abs().powf(2.0 / 3.0) + (norm_index * norm_index) as f64).powf(s);
        total += w * (re * re + im * im);
    }
    // dθ/2π = 1/(m·dt)
    (total / (m as f64 * dt)).sqrt()
}

#[test]
fn criterion_08_boundary_norm() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    let mut l2_gap = 0.0f64;
    for case in [BcCase::DirichletDirichlet, BcCase::NeumannNeumann, BcCase::DirichletNeumann] {
        let b = basis(case, 1.0, 6);
        let psi = b.modes()[1];
        let (t_final, n_t) = (2.0, 161);
        let dt = t_final / (n_t - 1) as f64;
        let g = |t: f64| (PI * t / t_final).sin() * (-t).exp() + 0.3 * (-(t - 1.0).powi(2) / 0.05).exp();
        let mu = BoundaryTrace::from_fn(b.clone(), t_final, n_t, |t, y| g(t) * psi.value(y)).unwrap();
        let samples: Vec<f64> = (0..n_t).map(|i| g(i as f64 * dt)).collect();
        for s in [0.0, 1.0, 4.0] {
            let oracle = separable_norm_oracle(&samples, dt, psi.norm_index, s);
            worst = worst.max((boundary_norm(&mu, s) - oracle).abs() / oracle);
        }
        // space-time L₂ by the rectangle rule, ψ₁ orthonormal
        let l2 = (dt * samples.iter().map(|v| v * v).sum::<f64>()).sqrt();
        l2_gap = l2_gap.max((boundary_norm(&mu, 0.0) - l2).abs() / l2);
    }
    let detail = format!("s ∈ {{0, 1, 4}} vs direct-DFT oracle {worst:.2e} ≤ 1e-8; s = 0 vs space-time L₂ {l2_gap:.2e} ≤ 1e-8");
    assert!(verdict("8", "boundary norm", worst <= 1e-8 && l2_gap <= 1e-8, &detail, started, Duration::from_secs(30)));
}

#[test]
fn criterion_09_interpolation_monitors() {
    let started = Instant::now();
    let w = WeightFunction::exponential(0.25).unwrap();
    let family = bump_family(BcCase::DirichletDirichlet, 1.0, 200, 11).unwrap();
    let base = MonitorGrid {
        x_max: 15.0,
        width: 1.0,
        x_panels: 60,
        y_points: 16,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for ineq in Inequality::ALL {
        let coarse = interpolation_ratio_monitor(&family[..100], ineq, &w, &w, base).max_ratio;
        let fine = interpolation_ratio_monitor(&family[..100], ineq, &w, &w, base.refined()).max_ratio;
        let more = interpolation_ratio_monitor(&family, ineq, &w, &w, base).max_ratio;
        let (dg, df) = ((fine / coarse - 1.0).abs(), (more / coarse - 1.0).abs());
        pass &= dg < 0.05 && df < 0.05 && coarse.is_finite() && coarse > 0.0;
        parts.push(format!("{ineq}: max ratio {coarse:.4}, grid doubling {dg:.2e}, 100→200 fields {df:.2e}"));
    }
    let detail = format!("{} (each < 5%)", parts.join("; "));
    assert!(verdict("9", "interpolation monitors", pass, &detail, started, Duration::from_secs(60)));
}

#[test]
fn criterion_10_continuous_dependence() {
    let started = Instant::now();
    let grid = GridSpec::new(30.0, 301, 0.005, basis(BcCase::DirichletDirichlet, 1.0, 8)).unwrap();
    let psi = unit_mode(&grid);
    let psi2 = grid.basis().modes()[1];
    let base = move |x: f64, y: f64| 0.5 * (-(x - 5.0).powi(2)).exp() * psi.value(y);
    let bump = move |x: f64, y: f64| (-(x - 6.0).powi(2) / 2.0).exp() * (psi.value(y) + 0.5 * psi2.value(y));
    let solve = |u0: &dyn Fn(f64, f64) -> f64| {
        let config = SolverConfig::new(grid.clone(), 0.0, 1.0);
        let (solver, mut state) = Solver::init_fn(config, u0, ZeroInflow).unwrap();
        solver.run_with(&mut state, |_| {}).unwrap();
        state.field(&grid)
    };
    let reference = solve(&base);
    let mut ratios = Vec::new();
    for delta in [1e-2, 1e-3, 1e-4] {
        let perturbed = solve(&|x, y| base(x, y) + delta * bump(x, y));
        let d0 = Field2D::from_fn(&grid, |x, y| delta * bump(x, y));
        ratios.push((energy(&perturbed.axpy(-1.0, &reference).unwrap(), &grid) / energy(&d0, &grid)).sqrt());
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |m, r| (m.0.min(*r), m.1.max(*r)));
    let spread = hi / lo - 1.0;
    let detail = format!("Lipschitz ratios {ratios:.5?}, spread {spread:.2e} < 20%");
    assert!(verdict("10", "continuous dependence", spread < 0.2, &detail, started, Duration::from_secs(300)));
}

#[test]
fn monitor_interior_regularity() {
    let started = Instant::now();
    let grid = GridSpec::new(30.0, 301, 0.005, basis(BcCase::DirichletDirichlet, 1.0, 8)).unwrap();
    let psi = unit_mode(&grid);
    let w = WeightFunction::exponential(0.1).unwrap();
    let config = SolverConfig::new(grid.clone(), 0.0, 2.0);
    let (solver, mut state) =
        Solver::init_fn(config, |x, y| 0.1 * (-(x - 5.0).powi(2)).exp() * psi.value(y), ZeroInflow).unwrap();
    let mut fields = Vec::new();
    solver
        .run_with(&mut state, |s| {
            if s.step % 20 == 0 {
                fields.push(s.field(&grid));
            }
        })
        .unwrap();
    let mut peaks = [0.0f64; 3];
    let mut initial = [0.0f64; 3];
    for (k, u) in fields.iter().enumerate() {
        for n in 0..3 {
            let v = interior_norm(u, &grid, 1.0, 0.1, &w, (n, 0)).unwrap();
            if k == 0 {
                initial[n] = v;
            }
            peaks[n] = peaks[n].max(v / initial[n]);
        }
    }
    let pass = peaks.iter().all(|p| p.is_finite() && *p <= 10.0);
    let detail = format!("max over run of interior ‖∂ₓⁿu‖/initial for n = 0, 1, 2: {peaks:.3?} ≤ 10");
    assert!(verdict("NR", "interior-regularity monitor", pass, &detail, started, Duration::from_secs(60)));
}
