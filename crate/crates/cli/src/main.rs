use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;
use zk_core::diagnostics::weighted_norm;
use zk_core::io::{read_field_csv, to_rounded_json};
use zk_core::operators::GridSpec;
use zk_core::transverse::{BcCase, TransverseBasis};
use zk_core::weights::WeightFunction;
use zk_cli::config::{parse_config, ConfigError, ExperimentConfig};
use zk_cli::presets::{run_preset, Preset};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "zk", version, about = "Zakharov–Kuznetsov half-strip simulator and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset by name or an experiment file.
    Run {
        /// Preset name or path to a config file
        target: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of snapshots to write besides the initial one
        #[arg(long)]
        snapshots: Option<usize>,
    },
    /// Parse and validate an experiment file.
    Check { config: PathBuf },
    /// Weighted norms of a sampled field (CSV with columns x, y, u).
    Norms {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "a")]
        bc: BcCase,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Weight, e.g. `exp:alpha=0.25`, `pow:alpha=1` or `const`
        #[arg(long, default_value = "exp:alpha=0.25")]
        weight: WeightFunction,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            target,
            out,
            seed,
            snapshots,
        } => run(&target, &out, seed, snapshots),
        Command::Check { config } => check(&config),
        Command::Norms {
            input,
            bc,
            width,
            weight,
        } => norms(&input, bc, width, weight),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_USAGE)
    })?;
    parse_config(&text).map_err(|errors| {
        report(path, &errors);
        ExitCode::from(EXIT_USAGE)
    })
}

fn report(path: &Path, errors: &[ConfigError]) {
    for e in errors {
        eprintln!("{}: {e}", path.display());
    }
}

fn run(target: &str, out: &Path, seed: Option<u64>, snapshots: Option<usize>) -> ExitCode {
    let mut cfg = match target.parse::<Preset>() {
        Ok(p) => p.defaults(),
        Err(msg) => {
            let path = Path::new(target);
            if !path.exists() {
                eprintln!("error: {msg}; no config file at that path either");
                return ExitCode::from(EXIT_USAGE);
            }
            match load(path) {
                Ok(c) => c,
                Err(code) => return code,
            }
        }
    };
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    if let Some(k) = snapshots {
        cfg.run.snapshots = k;
    }
    match run_preset(&cfg, out) {
        Ok(summary) => {
            for c in &summary.checks {
                println!(
                    "{} {}: {:.6e} (threshold {:.6e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                );
            }
            println!("{}: {}", summary.preset, if summary.pass { "pass" } else { "fail" });
            ExitCode::from(if summary.pass { 0 } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn check(path: &Path) -> ExitCode {
    match load(path) {
        Ok(cfg) => {
            println!("{}: valid {} configuration", path.display(), cfg.preset);
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn norms(input: &Path, bc: BcCase, width: f64, weight: WeightFunction) -> ExitCode {
    let result = (|| -> zk_core::Result<serde_json::Value> {
        let sampled = read_field_csv(fs::File::open(input)?)?;
        let (nx, ny) = (sampled.xs.len(), sampled.ys.len());
        let basis = TransverseBasis::new(bc, width, ny)?;
        let off = basis
            .nodes()
            .iter()
            .zip(&sampled.ys)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if off > 1e-6 {
            return Err(zk_core::Error::Input(format!(
                "y samples are not the {ny} transverse nodes of case {bc} on width {width} (off by {off:.3e})"
            )));
        }
        let x_max = sampled.xs[nx - 1] - sampled.xs[0];
        let grid = GridSpec::new(x_max, nx, 1.0, Arc::new(basis))?;
        let mut out = serde_json::Map::new();
        out.insert("weight".into(), json!(weight.to_string()));
        for k in 0..=2 {
            out.insert(format!("h{k}"), json!(weighted_norm(&sampled.field, &grid, &weight, k)?));
        }
        to_rounded_json(&out)
    })();
    match result {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            ExitCode::SUCCESS
        }
        Err(e @ (zk_core::Error::Io(_) | zk_core::Error::Input(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
