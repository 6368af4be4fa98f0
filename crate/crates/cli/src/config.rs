//! `key = value` experiment files with `[grid]`, `[equation]`, `[weight]` and
//! `[run]` sections.
//!
//! Omitted keys take the defaults of the selected preset. Every problem in a
//! file is reported, each with its line number.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use zk_core::diagnostics::decay_params;
use zk_core::transverse::BcCase;
use zk_core::weights::WeightFunction;

use crate::presets::Preset;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub grid: GridSection,
    pub equation: EquationSection,
    pub weight: WeightSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSection {
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    /// Sponge onset as a fraction of `X_max`.
    pub sponge_start: f64,
    pub sponge_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationSection {
    pub bc: BcCase,
    pub width: f64,
    pub modes: usize,
    pub b: f64,
    pub linear: bool,
    pub hyperviscosity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    Exponential,
    Power,
    Constant,
}

impl FromStr for WeightFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exponential" => Ok(WeightFamily::Exponential),
            "power" => Ok(WeightFamily::Power),
            "constant" => Ok(WeightFamily::Constant),
            other => Err(format!("unknown weight family `{other}`: expected exponential, power or constant")),
        }
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightFamily::Exponential => "exponential",
            WeightFamily::Power => "power",
            WeightFamily::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSection {
    pub family: WeightFamily,
    pub alpha: f64,
}

impl WeightSection {
    pub fn function(&self) -> zk_core::Result<WeightFunction> {
        match self.family {
            WeightFamily::Exponential => WeightFunction::exponential(self.alpha),
            WeightFamily::Power => WeightFunction::power(self.alpha),
            WeightFamily::Constant => Ok(WeightFunction::constant()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub t_final: f64,
    pub amplitude: f64,
    pub seed: u64,
    /// Snapshots written besides the initial one; 0 writes none.
    pub snapshots: usize,
    pub cfl: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, `None` for problems with defaulted values.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["x_max", "nx", "dt", "sponge_start", "sponge_peak"]),
    ("equation", &["bc", "width", "modes", "b", "linear", "hyperviscosity"]),
    ("weight", &["family", "alpha"]),
    ("run", &["preset", "t_final", "amplitude", "seed", "snapshots", "cfl"]),
];

struct Entry<'a> {
    line: usize,
    section: &'a str,
    key: &'a str,
    value: &'a str,
}

fn split_entries<'a>(text: &'a str, errors: &mut Vec<ConfigError>) -> Vec<Entry<'a>> {
    let mut out: Vec<Entry<'a>> = Vec::new();
    let mut section: Option<&str> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        let err = |m: String| ConfigError {
            line: Some(line),
            message: m,
        };
        if let Some(name) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim();
            match KEYS.iter().find(|(sec, _)| *sec == name) {
                Some((sec, _)) => section = Some(sec),
                None => {
                    errors.push(err(format!(
                        "unknown section [{name}]: expected [grid], [equation], [weight] or [run]"
                    )));
                    section = None;
                }
            }
            continue;
        }
        let Some((key, value)) = s.split_once('=') else {
            errors.push(err(format!("expected `key = value`, found `{s}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            errors.push(err(format!("key `{key}` appears outside a known section")));
            continue;
        };
        let allowed = KEYS.iter().find(|(n, _)| *n == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            errors.push(err(format!("unknown key `{key}` in [{sec}]")));
            continue;
        }
        if let Some(prev) = out.iter().find(|e| e.section == sec && e.key == key) {
            errors.push(err(format!("duplicate key `{key}` (first set on line {})", prev.line)));
            continue;
        }
        out.push(Entry {
            line,
            section: sec,
            key,
            value,
        });
    }
    out
}

/// Parses and validates an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let entries = split_entries(text, &mut errors);
    let preset = match entries.iter().find(|e| e.section == "run" && e.key == "preset") {
        Some(e) => match e.value.parse::<Preset>() {
            Ok(p) => Some(p),
            Err(m) => {
                errors.push(ConfigError {
                    line: Some(e.line),
                    message: m,
                });
                None
            }
        },
        None => {
            errors.push(ConfigError {
                line: None,
                message: format!("[run] preset is required (one of {})", Preset::names().join(", ")),
            });
            None
        }
    };
    let Some(preset) = preset else {
        return Err(sorted(errors));
    };
    let mut cfg = preset.defaults();
    let mut lines = LineMap::default();
    for e in &entries {
        lines.record(e.section, e.key, e.line);
        if let Err(m) = assign(&mut cfg, e.section, e.key, e.value) {
            errors.push(ConfigError {
                line: Some(e.line),
                message: format!("[{}] {}: {m}", e.section, e.key),
            });
        }
    }
    for (key, message) in validate(&cfg) {
        errors.push(ConfigError {
            line: key.and_then(|(s, k)| lines.get(s, k)),
            message,
        });
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(sorted(errors))
    }
}

fn sorted(mut errors: Vec<ConfigError>) -> Vec<ConfigError> {
    errors.sort_by_key(|e| e.line.unwrap_or(0));
    errors
}

#[derive(Default)]
struct LineMap(Vec<(&'static str, &'static str, usize)>);

impl LineMap {
    fn record(&mut self, section: &str, key: &str, line: usize) {
        for (sec, keys) in KEYS {
            if *sec == section {
                if let Some(k) = keys.iter().find(|k| **k == key) {
                    self.0.push((sec, k, line));
                }
            }
        }
    }

    fn get(&self, section: &str, key: &str) -> Option<usize> {
        self.0.iter().find(|(s, k, _)| *s == section && *k == key).map(|e| e.2)
    }
}

fn num<T: FromStr>(v: &str, what: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("expected {what}, found `{v}`"))
}

fn assign(cfg: &mut ExperimentConfig, section: &str, key: &str, v: &str) -> Result<(), String> {
    const REAL: &str = "a real number";
    const COUNT: &str = "a nonnegative integer";
    match (section, key) {
        ("grid", "x_max") => cfg.grid.x_max = num(v, REAL)?,
        ("grid", "nx") => cfg.grid.nx = num(v, COUNT)?,
        ("grid", "dt") => cfg.grid.dt = num(v, REAL)?,
        ("grid", "sponge_start") => cfg.grid.sponge_start = num(v, REAL)?,
        ("grid", "sponge_peak") => cfg.grid.sponge_peak = num(v, REAL)?,
        ("equation", "bc") => cfg.equation.bc = v.parse().map_err(|e: zk_core::Error| e.to_string())?,
        ("equation", "width") => cfg.equation.width = num(v, REAL)?,
        ("equation", "modes") => cfg.equation.modes = num(v, COUNT)?,
        ("equation", "b") => cfg.equation.b = num(v, REAL)?,
        ("equation", "linear") => cfg.equation.linear = num(v, "true or false")?,
        ("equation", "hyperviscosity") => cfg.equation.hyperviscosity = num(v, REAL)?,
        ("weight", "family") => cfg.weight.family = v.parse()?,
        ("weight", "alpha") => cfg.weight.alpha = num(v, REAL)?,
        ("run", "preset") => {}
        ("run", "t_final") => cfg.run.t_final = num(v, REAL)?,
        ("run", "amplitude") => cfg.run.amplitude = num(v, REAL)?,
        ("run", "seed") => cfg.run.seed = num(v, COUNT)?,
        ("run", "snapshots") => cfg.run.snapshots = num(v, COUNT)?,
        ("run", "cfl") => cfg.run.cfl = num(v, REAL)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

type Problem = (Option<(&'static str, &'static str)>, String);

/// Invariant checks, each tagged with the key it concerns.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Problem> {
    let mut out: Vec<Problem> = Vec::new();
    let mut check = |ok: bool, key: (&'static str, &'static str), msg: String| {
        if !ok {
            out.push((Some(key), msg));
        }
    };
    let g = &cfg.grid;
    let e = &cfg.equation;
    let r = &cfg.run;
    check(g.x_max > 0.0 && g.x_max.is_finite(), ("grid", "x_max"), format!("X_max = {} must be positive", g.x_max));
    check(g.nx >= 8, ("grid", "nx"), format!("nx = {} must be at least 8", g.nx));
    check(g.dt > 0.0 && g.dt.is_finite(), ("grid", "dt"), format!("dt = {} must be positive", g.dt));
    check(
        g.sponge_start > 0.0 && g.sponge_start < 1.0,
        ("grid", "sponge_start"),
        format!("sponge_start = {} must lie in (0, 1) (fraction of X_max)", g.sponge_start),
    );
    check(g.sponge_peak >= 0.0, ("grid", "sponge_peak"), format!("sponge_peak = {} must be nonnegative", g.sponge_peak));
    check(e.width > 0.0 && e.width.is_finite(), ("equation", "width"), format!("width L = {} must be positive", e.width));
    check(e.modes >= 1, ("equation", "modes"), "modes must be at least 1".into());
    check(
        e.bc != BcCase::Periodic || e.modes % 2 == 0,
        ("equation", "modes"),
        format!("periodic strips need an even number of modes, got {}", e.modes),
    );
    check(e.b.is_finite(), ("equation", "b"), "b must be finite".into());
    check(e.hyperviscosity >= 0.0, ("equation", "hyperviscosity"), "hyperviscosity must be nonnegative".into());
    check(r.t_final >= 0.0 && r.t_final.is_finite(), ("run", "t_final"), format!("t_final = {} must be nonnegative", r.t_final));
    check(r.amplitude.is_finite(), ("run", "amplitude"), "amplitude must be finite".into());
    check(r.cfl > 0.0, ("run", "cfl"), format!("cfl = {} must be positive", r.cfl));
    let w = &cfg.weight;
    if w.family != WeightFamily::Constant {
        check(w.alpha > 0.0 && w.alpha.is_finite(), ("weight", "alpha"), format!("α = {} must be positive", w.alpha));
    }
    if cfg.preset.is_decay() {
        match decay_params(e.bc, e.width, e.b, w.alpha) {
            Err(_) => out.push((
                Some(("equation", "bc")),
                format!("decay runs need case a or c, got {}", e.bc),
            )),
            Ok(p) => {
                if w.alpha > p.alpha0 {
                    out.push((Some(("weight", "alpha")), format!("α exceeds α₀ ≈ {:.5}", p.alpha0)));
                }
                if let Some(l0) = p.l0 {
                    if e.width >= l0 {
                        out.push((Some(("equation", "width")), format!("L = {} is not below L₀ ≈ {l0:.5}", e.width)));
                    }
                }
                if w.family != WeightFamily::Exponential {
                    out.push((Some(("weight", "family")), "decay runs use the exponential weight".into()));
                }
            }
        }
    }
    out
}

impl ExperimentConfig {
    /// Whether the decay constants admit this run (always true outside decay presets).
    pub fn admissible(&self) -> bool {
        !self.preset.is_decay() || validate(self).is_empty()
    }

    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let e = &self.equation;
        let w = &self.weight;
        let r = &self.run;
        format!(
            "[grid]\nx_max = {:?}\nnx = {}\ndt = {:?}\nsponge_start = {:?}\nsponge_peak = {:?}\n\n\
             [equation]\nbc = {}\nwidth = {:?}\nmodes = {}\nb = {:?}\nlinear = {}\nhyperviscosity = {:?}\n\n\
             [weight]\nfamily = {}\nalpha = {:?}\n\n\
             [run]\npreset = {}\nt_final = {:?}\namplitude = {:?}\nseed = {}\nsnapshots = {}\ncfl = {:?}\n",
            g.x_max,
            g.nx,
            g.dt,
            g.sponge_start,
            g.sponge_peak,
            e.bc,
            e.width,
            e.modes,
            e.b,
            e.linear,
            e.hyperviscosity,
            w.family,
            w.alpha,
            self.preset,
            r.t_final,
            r.amplitude,
            r.seed,
            r.snapshots,
            r.cfl,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_decay_config_fills_defaults() {
        let cfg = parse_config("[run]\npreset = decay_a\n").unwrap();
        assert_eq!(cfg, Preset::DecayA.defaults());
        assert!(cfg.admissible());
        assert_eq!(cfg.equation.bc, BcCase::DirichletDirichlet);
    }

    #[test]
    fn unknown_case_lists_the_valid_tags() {
        let errs = parse_config("[equation]\nbc = e\n[run]\npreset = conservation\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(2));
        assert!(errs[0].message.contains("a, b, c, d"), "{}", errs[0].message);
    }

    #[test]
    fn alpha_above_threshold_is_rejected() {
        let errs = parse_config("[weight]\nalpha = 0.3\n[equation]\nwidth = 1\n[run]\npreset = decay_a\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(2));
        assert!(errs[0].message.contains("α exceeds α₀ ≈ 0.27768"), "{}", errs[0].message);
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "\
[grid]
nx = four
dt = -1
colour = blue
[equation]
width = 1
[run]
preset = conservation
";
        let errs = parse_config(text).unwrap_err();
        let lines: Vec<_> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(2), Some(3), Some(4)], "{errs:?}");
        assert!(errs[0].message.contains("integer"));
        assert!(errs[2].message.contains("unknown key `colour`"));
    }

    #[test]
    fn structural_errors() {
        let errs = parse_config("x = 1\n[mesh]\n[run]\npreset = nope\nnot a pair\n").unwrap_err();
        let lines: Vec<_> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(1), Some(2), Some(4), Some(5)], "{errs:?}");
        let errs = parse_config("[grid]\nnx = 10\n").unwrap_err();
        assert!(errs[0].message.contains("preset is required"));
        let errs = parse_config("[run]\npreset = decay_c\npreset = decay_a\n").unwrap_err();
        assert!(errs[0].message.contains("duplicate"));
    }

    #[test]
    fn decay_presets_need_a_decaying_case() {
        let errs = parse_config("[equation]\nbc = b\n[run]\npreset = decay_c\n").unwrap_err();
        assert!(errs.iter().any(|e| e.line == Some(2) && e.message.contains("case a or c")));
        let errs = parse_config("[equation]\nb = 4\nwidth = 1\n[run]\npreset = decay_a\n").unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("L₀")), "{errs:?}");
    }

    #[test]
    fn every_preset_round_trips() {
        for p in Preset::ALL {
            let mut cfg = p.defaults();
            cfg.grid.dt = 0.1 + 0.2;
            cfg.run.seed = 12345;
            let back = parse_config(&cfg.to_text()).unwrap();
            assert_eq!(back, cfg, "{p}");
            assert_eq!(back.to_text(), cfg.to_text());
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = parse_config("# experiment\n\n[run]  \npreset = steklov_suite # suite\nseed = 9\n").unwrap();
        assert_eq!(cfg.run.seed, 9);
    }
}
