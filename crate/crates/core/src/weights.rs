//! Admissible weight functions on the half-line, the smooth cut-off `η`, and
//! weight ladders.
//!
//! Every weight carries closed-form derivatives up to third order; the energy
//! identities never need more than `ρ'''`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order any weight evaluator supports.
pub const MAX_WEIGHT_ORDER: usize = 3;

/// Anything that can report `[ρ, ρ', ρ'', ρ''']` at a point.
pub trait WeightProfile: Sync {
    fn derivatives(&self, x: f64) -> [f64; 4];

    fn value(&self, x: f64) -> f64 {
        self.derivatives(x)[0]
    }
}

/// An admissible weight `ρ(x)`, `x >= 0`.
///
/// * `Exponential`: `ρ = e^{2αx} / (2α)`, so that `ρ' = e^{2αx}`.
/// * `Power`: `ρ = (1+x)^p / (2α)`; the plain power family uses `p = 2α`,
///   ladder rungs use `p = 2(α - j)`.
/// * `Constant`: `ρ ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFunction {
    Exponential { alpha: f64 },
    Power { alpha: f64, exponent: f64 },
    Constant,
}

impl WeightFunction {
    pub fn exponential(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WeightFunction::Exponential { alpha })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WeightFunction::Power {
            alpha,
            exponent: 2.0 * alpha,
        })
    }

    /// Rung `j` of the power ladder: `(1+x)^{2(α-j)} / (2α)`.
    pub fn power_rung(alpha: f64, j: u32) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(WeightFunction::Power {
            alpha,
            exponent: 2.0 * (alpha - f64::from(j)),
        })
    }

    pub fn constant() -> Self {
        WeightFunction::Constant
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            WeightFunction::Exponential { alpha } | WeightFunction::Power { alpha, .. } => {
                Some(alpha)
            }
            WeightFunction::Constant => None,
        }
    }

    /// `ρ^{(order)}(x)` with argument checking.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        if order > MAX_WEIGHT_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_WEIGHT_ORDER,
            });
        }
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("weight evaluated at x = {x} < 0")));
        }
        Ok(self.derivatives(x)[order])
    }
}

impl WeightProfile for WeightFunction {
    fn derivatives(&self, x: f64) -> [f64; 4] {
        match *self {
            WeightFunction::Exponential { alpha } => {
                let k = 2.0 * alpha;
                let e = (k * x).exp();
                [e / k, e, k * e, k * k * e]
            }
            WeightFunction::Power { alpha, exponent: p } => {
                let s = 1.0 + x;
                let c = 1.0 / (2.0 * alpha);
                [
                    c * s.powf(p),
                    c * p * s.powf(p - 1.0),
                    c * p * (p - 1.0) * s.powf(p - 2.0),
                    c * p * (p - 1.0) * (p - 2.0) * s.powf(p - 3.0),
                ]
            }
            WeightFunction::Constant => [1.0, 0.0, 0.0, 0.0],
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight rate alpha = {alpha} must be positive")))
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightFunction::Exponential { alpha } => write!(f, "exp:alpha={alpha:?}"),
            WeightFunction::Power { alpha, exponent } if exponent == 2.0 * alpha => {
                write!(f, "pow:alpha={alpha:?}")
            }
            WeightFunction::Power { alpha, exponent } => {
                write!(f, "pow:alpha={alpha:?},exponent={exponent:?}")
            }
            WeightFunction::Constant => write!(f, "const"),
        }
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    /// Parses `exp:alpha=0.5`, `pow:alpha=1.0` or `const`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "const" {
            return Ok(WeightFunction::Constant);
        }
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("malformed weight '{s}'")))?;
        let mut alpha = None;
        let mut exponent = None;
        for kv in params.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed weight parameter '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("weight parameter '{kv}' is not a number")))?;
            match k.trim() {
                "alpha" => alpha = Some(v),
                "exponent" => exponent = Some(v),
                other => return Err(Error::Config(format!("unknown weight parameter '{other}'"))),
            }
        }
        let alpha = alpha.ok_or_else(|| Error::Config(format!("weight '{s}' needs alpha")))?;
        match family.trim() {
            "exp" if exponent.is_none() => WeightFunction::exponential(alpha),
            "pow" => {
                let w = WeightFunction::power(alpha)?;
                Ok(match exponent {
                    Some(p) => WeightFunction::Power { alpha, exponent: p },
                    None => w,
                })
            }
            other => Err(Error::Config(format!(
                "unknown weight family '{other}' (expected exp, pow or const)"
            ))),
        }
    }
}

/// Measured `max |ρ^{(j)}| / ρ` over a sample grid, `j = 1..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub max_ratio_per_order: [f64; 3],
}

pub fn check_admissible(
    w: &WeightFunction,
    x_max: f64,
    n_samples: usize,
) -> Result<AdmissibilityReport> {
    if !(x_max > 0.0) || n_samples < 2 {
        return Err(Error::Domain(format!(
            "admissibility check needs x_max > 0 and at least 2 samples (got {x_max}, {n_samples})"
        )));
    }
    let mut max = [0.0f64; 3];
    for k in 0..n_samples {
        let x = x_max * k as f64 / (n_samples - 1) as f64;
        let d = w.derivatives(x);
        if !(d[0] > 0.0) {
            return Err(Error::AdmissibilityViolation { x, value: d[0] });
        }
        for j in 0..3 {
            max[j] = max[j].max((d[j + 1] / d[0]).abs());
        }
    }
    Ok(AdmissibilityReport {
        max_ratio_per_order: max,
    })
}

/// Value and first three derivatives of a scalar function, propagated exactly.
#[derive(Debug, Clone, Copy)]
struct Jet([f64; 4]);

impl Jet {
    fn mul(self, o: Jet) -> Jet {
        let [f0, f1, f2, f3] = self.0;
        let [g0, g1, g2, g3] = o.0;
        Jet([
            f0 * g0,
            f1 * g0 + f0 * g1,
            f2 * g0 + 2.0 * f1 * g1 + f0 * g2,
            f3 * g0 + 3.0 * f2 * g1 + 3.0 * f1 * g2 + f0 * g3,
        ])
    }

    fn add(self, o: Jet) -> Jet {
        Jet([
            self.0[0] + o.0[0],
            self.0[1] + o.0[1],
            self.0[2] + o.0[2],
            self.0[3] + o.0[3],
        ])
    }

    fn recip(self) -> Jet {
        let [g0, g1, g2, g3] = self.0;
        let r = 1.0 / g0;
        Jet([
            r,
            -g1 * r * r,
            (2.0 * g1 * g1 - g0 * g2) * r * r * r,
            (-6.0 * g1 * g1 * g1 + 6.0 * g0 * g1 * g2 - g0 * g0 * g3) * r * r * r * r,
        ])
    }
}

/// `σ(z) = exp(-1/z)` for `z > 0`, zero otherwise, with derivatives in `z`.
fn bump_edge(z: f64) -> Jet {
    // exp(-1/z) underflows well before z reaches 2e-3
    if z <= 2e-3 {
        return Jet([0.0; 4]);
    }
    let e = (-1.0 / z).exp();
    let h1 = 1.0 / (z * z);
    let h2 = -2.0 / (z * z * z);
    let h3 = 6.0 / (z * z * z * z);
    Jet([
        e,
        h1 * e,
        (h2 + h1 * h1) * e,
        (h3 + 3.0 * h1 * h2 + h1 * h1 * h1) * e,
    ])
}

/// `[η, η', η'', η''']` at `x` for `η = σ(x) / (σ(x) + σ(1-x))`.
pub fn cutoff_eta_derivatives(x: f64) -> [f64; 4] {
    if x <= 0.0 {
        return [0.0; 4];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let a = bump_edge(x);
    let b = bump_edge(1.0 - x);
    let b = Jet([b.0[0], -b.0[1], b.0[2], -b.0[3]]);
    let eta = a.mul(a.add(b).recip());
    eta.0
}

/// Smooth monotone ramp: 0 for `x <= 0`, 1 for `x >= 1`, `η(x) + η(1-x) = 1`.
pub fn cutoff_eta(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = bump_edge(x).0[0];
    let b = bump_edge(1.0 - x).0[0];
    a / (a + b)
}

/// `η((2x - x₀)/x₀)`: vanishes for `x <= x₀/2`, equals 1 for `x >= x₀`.
pub fn eta_x0(x: f64, x0: f64) -> Result<f64> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!("cut-off shift x0 = {x0} must be positive")));
    }
    Ok(cutoff_eta((2.0 * x - x0) / x0))
}

/// The product weight `ρ(x)·η_{x₀}(x)` used by the localized identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedWeight {
    pub base: WeightFunction,
    pub x0: f64,
}

impl LocalizedWeight {
    pub fn new(base: WeightFunction, x0: f64) -> Result<Self> {
        if !(x0 > 0.0) {
            return Err(Error::Domain(format!("cut-off shift x0 = {x0} must be positive")));
        }
        Ok(LocalizedWeight { base, x0 })
    }
}

impl WeightProfile for LocalizedWeight {
    fn derivatives(&self, x: f64) -> [f64; 4] {
        let scale = 2.0 / self.x0;
        let e = cutoff_eta_derivatives((2.0 * x - self.x0) / self.x0);
        let eta = Jet([e[0], e[1] * scale, e[2] * scale * scale, e[3] * scale.powi(3)]);
        Jet(self.base.derivatives(x)).mul(eta).0
    }
}

/// Ordered weights `ρ_0..ρ_n` with the slack constant of the ladder inequality
/// `ρ_j ≤ c·(ρ'_j ρ'_{j-1})^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightLadder {
    pub weights: Vec<WeightFunction>,
    pub slack: f64,
}

impl WeightLadder {
    /// Identical exponential rungs.
    pub fn exponential(alpha: f64, n: usize, slack: f64) -> Result<Self> {
        let w = WeightFunction::exponential(alpha)?;
        Ok(WeightLadder {
            weights: vec![w; n + 1],
            slack,
        })
    }

    /// Rungs `(1+x)^{2(α-j)} / (2α)`, `j = 0..=n`.
    pub fn power(alpha: f64, n: u32, slack: f64) -> Result<Self> {
        let weights = (0..=n)
            .map(|j| WeightFunction::power_rung(alpha, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightLadder { weights, slack })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderReport {
    pub holds: bool,
    /// `max_j max_x ρ_j / (ρ'_j ρ'_{j-1})^{1/2}`
    pub worst_ratio: f64,
    pub worst_x: f64,
    pub worst_rung: usize,
}

pub fn check_ladder(ladder: &WeightLadder, x_max: f64, n_samples: usize) -> Result<LadderReport> {
    if ladder.weights.is_empty() {
        return Err(Error::IllPosedLadder("ladder is empty".into()));
    }
    if ladder
        .weights
        .iter()
        .any(|w| matches!(w, WeightFunction::Constant))
    {
        return Err(Error::IllPosedLadder(
            "constant weight has ρ' ≡ 0 and cannot appear in a ladder".into(),
        ));
    }
    for w in &ladder.weights {
        check_admissible(w, x_max, n_samples)?;
    }
    let mut report = LadderReport {
        holds: true,
        worst_ratio: 0.0,
        worst_x: 0.0,
        worst_rung: 0,
    };
    for j in 1..ladder.weights.len() {
        for k in 0..n_samples {
            let x = x_max * k as f64 / (n_samples - 1) as f64;
            let cur = ladder.weights[j].derivatives(x);
            let prev = ladder.weights[j - 1].derivatives(x);
            if cur[1] <= 0.0 || prev[1] <= 0.0 {
                return Err(Error::IllPosedLadder(format!(
                    "ρ' vanishes or changes sign at x = {x} on rung {j}"
                )));
            }
            let ratio = cur[0] / (cur[1] * prev[1]).sqrt();
            if ratio > report.worst_ratio {
                report.worst_ratio = ratio;
                report.worst_x = x;
                report.worst_rung = j;
            }
        }
    }
    report.holds = report.worst_ratio <= ladder.slack;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eval_examples() {
        let e = WeightFunction::exponential(0.5).unwrap();
        assert_relative_eq!(e.eval(0.0, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(WeightFunction::constant().eval(3.7, 1).unwrap(), 0.0);
        let p = WeightFunction::power(1.0).unwrap();
        assert_relative_eq!(p.eval(1.0, 1).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn eval_rejects_bad_arguments() {
        let e = WeightFunction::exponential(0.5).unwrap();
        assert!(matches!(e.eval(1.0, 4), Err(Error::UnsupportedOrder { order: 4, .. })));
        assert!(matches!(e.eval(-0.1, 0), Err(Error::Domain(_))));
        assert!(WeightFunction::exponential(0.0).is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let weights = [
            WeightFunction::exponential(0.3).unwrap(),
            WeightFunction::power(1.5).unwrap(),
            WeightFunction::constant(),
        ];
        for w in &weights {
            for order in 1..=3 {
                let x = 1.3;
                let exact = w.eval(x, order).unwrap();
                let err = |h: f64| {
                    let fd = (w.eval(x + h, order - 1).unwrap() - w.eval(x - h, order - 1).unwrap())
                        / (2.0 * h);
                    (fd - exact).abs()
                };
                let (e1, e2) = (err(1e-2), err(5e-3));
                if e1 < 1e-10 * (1.0 + exact.abs()) {
                    // the stencil is exact on this polynomial piece
                    continue;
                }
                if exact.abs() > 0.0 {
                    let rate = (e1 / e2).log2();
                    assert!((rate - 2.0).abs() < 0.1, "{w}: order {order} rate {rate}");
                } else {
                    assert!(e1 < 1e-12);
                }
            }
        }
    }

    #[test]
    fn exponential_identity_holds() {
        let w = WeightFunction::exponential(0.7).unwrap();
        for k in 0..100 {
            let x = 0.13 * k as f64;
            let d = w.derivatives(x);
            assert_relative_eq!(d[1], 1.4 * d[0], max_relative = 1e-15);
        }
    }

    #[test]
    fn admissibility_examples() {
        let e = check_admissible(&WeightFunction::exponential(0.5).unwrap(), 10.0, 101).unwrap();
        assert_relative_eq!(e.max_ratio_per_order[0], 1.0, epsilon = 1e-12);
        let p = check_admissible(&WeightFunction::power(1.0).unwrap(), 10.0, 101).unwrap();
        assert_relative_eq!(p.max_ratio_per_order[0], 2.0, epsilon = 1e-12);
        let c = check_admissible(&WeightFunction::constant(), 10.0, 11).unwrap();
        assert_eq!(c.max_ratio_per_order, [0.0; 3]);
    }

    #[test]
    fn admissibility_maxima_do_not_depend_on_range() {
        for w in [
            WeightFunction::exponential(0.25).unwrap(),
            WeightFunction::power(2.0).unwrap(),
        ] {
            let a = check_admissible(&w, 10.0, 1001).unwrap();
            let b = check_admissible(&w, 100.0, 1001).unwrap();
            assert!((a.max_ratio_per_order[0] - b.max_ratio_per_order[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn admissibility_rejects_bad_sampling() {
        assert!(check_admissible(&WeightFunction::constant(), 0.0, 10).is_err());
        assert!(check_admissible(&WeightFunction::constant(), 1.0, 1).is_err());
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(cutoff_eta(-1.0), 0.0);
        assert_eq!(cutoff_eta(2.0), 1.0);
        assert_eq!(cutoff_eta(0.5), 0.5);
        assert_eq!(eta_x0(2.0, 2.0).unwrap(), 1.0);
        assert!(eta_x0(1.0, 0.0).is_err());
    }

    #[test]
    fn cutoff_partition_of_unity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-1.0..2.0);
            assert!((cutoff_eta(x) + cutoff_eta(1.0 - x) - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        for &x in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let d = cutoff_eta_derivatives(x);
            assert_relative_eq!(d[0], cutoff_eta(x), max_relative = 1e-14);
            for j in 1..=3 {
                let h = 1e-5;
                let fd = (cutoff_eta_derivatives(x + h)[j - 1] - cutoff_eta_derivatives(x - h)[j - 1])
                    / (2.0 * h);
                assert!(
                    (fd - d[j]).abs() <= 1e-6 * (1.0 + d[j].abs()),
                    "x={x} order {j}: {fd} vs {}",
                    d[j]
                );
            }
        }
    }

    #[test]
    fn localized_weight_matches_product_rule_numerically() {
        let lw = LocalizedWeight::new(WeightFunction::exponential(0.25).unwrap(), 2.0).unwrap();
        for &x in &[0.5, 1.2, 1.5, 1.9, 3.0] {
            let d = lw.derivatives(x);
            let f = |z: f64| lw.base.value(z) * eta_x0(z, 2.0).unwrap();
            assert_relative_eq!(d[0], f(x), max_relative = 1e-14);
            let h = 1e-5;
            let fd1 = (f(x + h) - f(x - h)) / (2.0 * h);
            assert!((fd1 - d[1]).abs() < 1e-6 * (1.0 + d[1].abs()));
        }
        assert_eq!(lw.derivatives(0.9), [0.0; 4]);
    }

    #[test]
    fn ladder_examples() {
        let exp = WeightLadder::exponential(1.0, 3, 1.0).unwrap();
        let r = check_ladder(&exp, 10.0, 201).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.worst_ratio, 0.5, epsilon = 1e-12);

        let pow = WeightLadder::power(3.0, 2, 10.0).unwrap();
        assert!(check_ladder(&pow, 10.0, 201).unwrap().holds);

        let bad = WeightLadder {
            weights: vec![WeightFunction::exponential(1.0).unwrap(), WeightFunction::constant()],
            slack: 1.0,
        };
        assert!(matches!(check_ladder(&bad, 10.0, 11), Err(Error::IllPosedLadder(_))));
    }

    #[test]
    fn ladder_reports_violation_with_small_slack() {
        let pow = WeightLadder::power(3.0, 2, 0.1).unwrap();
        let r = check_ladder(&pow, 10.0, 201).unwrap();
        assert!(!r.holds);
        assert!(r.worst_ratio > 0.1);
    }

    #[test]
    fn weight_spec_parsing() {
        assert_eq!(
            "exp:alpha=0.5".parse::<WeightFunction>().unwrap(),
            WeightFunction::exponential(0.5).unwrap()
        );
        assert_eq!(
            "pow:alpha=1.0".parse::<WeightFunction>().unwrap(),
            WeightFunction::power(1.0).unwrap()
        );
        assert_eq!("const".parse::<WeightFunction>().unwrap(), WeightFunction::Constant);
        assert!("gauss:alpha=1".parse::<WeightFunction>().is_err());
        assert!("exp:beta=1".parse::<WeightFunction>().is_err());
    }

    proptest! {
        #[test]
        fn weight_spec_round_trips(alpha in 1e-3f64..10.0, fam in 0usize..3) {
            let w = match fam {
                0 => WeightFunction::exponential(alpha).unwrap(),
                1 => WeightFunction::power(alpha).unwrap(),
                _ => WeightFunction::Constant,
            };
            prop_assert_eq!(w.to_string().parse::<WeightFunction>().unwrap(), w);
        }

        #[test]
        fn weights_stay_positive(alpha in 1e-2f64..3.0, x in 0.0f64..50.0) {
            prop_assert!(WeightFunction::exponential(alpha).unwrap().value(x) > 0.0);
            prop_assert!(WeightFunction::power(alpha).unwrap().value(x) > 0.0);
        }
    }
}
