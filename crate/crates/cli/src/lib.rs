//! Experiment runner: layered configuration, the experiment catalogue and
//! artifact output (manifest, CSV tables, SVG charts).

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod stats;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::json;

pub use artifacts::{Check, Outcome};
pub use config::{Layers, Settings};
pub use error::{CliError, Result};

/// Version string recorded in manifests.
pub const VERSION: &str = concat!("symlab ", env!("CARGO_PKG_VERSION"));

/// A resolved request to run one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub name: String,
    pub layers: Layers,
    pub settings: Settings,
    pub out: PathBuf,
}

impl ExperimentSpec {
    /// Layers experiment defaults, an optional config file and flag
    /// assignments, in increasing precedence.
    pub fn new(name: &str, file: Option<&Path>, flags: &[String], seeds: Option<&str>, out: PathBuf) -> Result<Self> {
        let exp = experiments::find(name).ok_or_else(|| CliError::UnknownExperiment(name.into()))?;
        let mut layers = Layers {
            experiment: exp.defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            ..Default::default()
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            layers.file = config::parse_text(&text)?;
            layers.file_path = Some(path.to_path_buf());
        }
        for f in flags {
            let (k, v) = config::parse_assignment(f)?;
            layers.flags.insert(k, v);
        }
        if let Some(r) = seeds {
            config::parse_range(r)?;
            layers.flags.insert("seeds".into(), r.to_string());
        }
        let settings = Settings::from_resolved(&layers.resolve())?;
        Ok(ExperimentSpec { name: name.into(), layers, settings, out })
    }

    /// Same, reading only a config file.
    pub fn from_file(name: &str, path: &Path, out: PathBuf) -> Result<Self> {
        Self::new(name, Some(path), &[], None, out)
    }

    /// The manifest: config echo with per-key provenance, seeds, version.
    pub fn manifest(&self, outcome: &Outcome, files: &[String]) -> serde_json::Value {
        let resolved = self.layers.resolve();
        let config: serde_json::Map<String, serde_json::Value> =
            resolved.iter().map(|(k, (v, _))| (k.clone(), json!(v))).collect();
        let sources: serde_json::Map<String, serde_json::Value> =
            resolved.iter().map(|(k, (_, l))| (k.clone(), json!(l))).collect();
        json!({
            "experiment": self.name,
            "version": VERSION,
            "config": config,
            "sources": sources,
            "layers": {
                "experiment": self.layers.experiment,
                "file": self.layers.file,
                "file_path": self.layers.file_path,
                "flags": self.layers.flags,
            },
            "seeds": [self.settings.seeds.start, self.settings.seeds.end],
            "passed": outcome.passed(),
            "checks": outcome.checks,
            "notes": outcome.notes,
            "artifacts": files,
        })
    }
}

/// Runs the experiment, inside a dedicated pool when `SYMLAB_THREADS` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    let exp = experiments::find(&spec.name).ok_or_else(|| CliError::UnknownExperiment(spec.name.clone()))?;
    match std::env::var("SYMLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| (exp.run)(&spec.settings)),
        None => (exp.run)(&spec.settings),
    }
}

/// Runs and writes every artifact plus `manifest.json` into `spec.out`.
pub fn run_and_write(spec: &ExperimentSpec) -> Result<Outcome> {
    let outcome = run_experiment(spec)?;
    let mut files = outcome.write(&spec.out)?;
    files.push("manifest.json".into());
    let manifest = spec.manifest(&outcome, &files);
    std::fs::write(spec.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(outcome)
}

#[derive(Parser, Debug)]
#[command(name = "symlab", version, about = "Stochastic Yang-Mills lattice experiments", after_help = catalogue_help())]
struct Args {
    /// Experiment name.
    experiment: String,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed range a..b.
    #[arg(long)]
    seeds: Option<String>,
}

fn catalogue_help() -> String {
    let mut s = String::from("Experiments:\n");
    for e in experiments::CATALOGUE {
        s.push_str(&format!("  {:<22} {}\n", e.name, e.summary));
    }
    s.push_str("\nKeys (default):\n");
    for (k, v, help) in config::KEYS {
        s.push_str(&format!("  {k:<18} {help} ({v})\n"));
    }
    s
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let spec = match ExperimentSpec::new(&args.experiment, args.config.as_deref(), &args.set, args.seeds.as_deref(), args.out.clone()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::UnknownExperiment(_)) {
                eprintln!("usage: symlab <experiment> [--config path] [--set key=value ...] [--out dir] [--seeds a..b]");
                eprint!("{}", catalogue_help());
            }
            return 2;
        }
    };
    match run_and_write(&spec) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {} (want {})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
            }
            println!("artifacts in {}", spec.out.display());
            if outcome.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
