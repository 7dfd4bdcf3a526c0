use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use duffing_ring::dynamics::reachable_set;
use duffing_ring::experiment::{emit_drive, preset, preset_names, preset_text, run, validate, Severity, WORKERS_ENV};
use duffing_ring::{ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "duffing-ring", version, about = "Driven ring oscillator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Experiment config (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset, F1..F6.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => Ok(ExperimentConfig::load(path)?),
            (None, Some(name)) => Ok(preset(name)?),
            (None, None) => bail!("one of --config or --preset is required"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output directory. Defaults to the config's `output_dir`, then `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Ring eigenvalues and dispersion relation.
    Dispersion(RunArgs),
    /// Linear-regime drive battery: envelopes and spectrograms.
    Battery(RunArgs),
    /// Four-class tone classification against SNR.
    Classify(RunArgs),
    /// Harmonic energies at two shape phases, linear and Duffing.
    ShapeCompare(RunArgs),
    /// Shape-phase sweep and the peak position phi0.
    Phi0Sweep(RunArgs),
    /// phi0 across the configured alpha grid.
    AlphaTrajectory(RunArgs),
    /// phi0 statistics under band-limited drive noise.
    NoiseRobustness(RunArgs),
    /// Write the configured drive as CSV (t, s).
    EmitDrive {
        #[command(flatten)]
        source: Source,
        /// Add band-limited noise at this SNR.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Output wavenumbers reachable by one cubic mixing step.
    SelectionRule {
        #[arg(long)]
        n_nodes: usize,
        /// Driven wavenumbers, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
    },
    /// Check a config and print its diagnostics.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// List presets, or print one as TOML.
    Preset { name: Option<String> },
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<ExitCode> {
    let mut cfg = args.source.load()?;
    if cfg.experiment != kind {
        eprintln!("note: running `{kind}` with a `{}` config", cfg.experiment);
        cfg.experiment = kind;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(w) = args.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        cfg.workers = Some(w);
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(kind.as_str()));

    let manifest = run(&cfg, &out)?;
    for w in &manifest.warnings {
        eprintln!("{w}");
    }
    eprintln!(
        "wrote {} files to {} in {:.1} s",
        manifest.files.len() + 1,
        out.display(),
        manifest.wall_time_s
    );
    println!("{:#}", manifest.summary);
    if manifest.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &manifest.failures {
            eprintln!("failed: {f}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let kind_args = match &cli.command {
        Command::Dispersion(a) => Some((ExperimentKind::Dispersion, a)),
        Command::Battery(a) => Some((ExperimentKind::Battery, a)),
        Command::Classify(a) => Some((ExperimentKind::Classify, a)),
        Command::ShapeCompare(a) => Some((ExperimentKind::ShapeCompare, a)),
        Command::Phi0Sweep(a) => Some((ExperimentKind::Phi0Sweep, a)),
        Command::AlphaTrajectory(a) => Some((ExperimentKind::AlphaTrajectory, a)),
        Command::NoiseRobustness(a) => Some((ExperimentKind::NoiseRobustness, a)),
        _ => None,
    };
    if let Some((kind, args)) = kind_args {
        return run_experiment(kind, args);
    }
    match cli.command {
        Command::EmitDrive {
            source,
            snr_db,
            seed,
            out,
        } => {
            let mut cfg = source.load()?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let bytes = emit_drive(&cfg, snr_db)?.to_bytes()?;
            match out {
                Some(path) => fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::SelectionRule { n_nodes, modes } => {
            if n_nodes < 4 || n_nodes % 2 != 0 {
                bail!("N must be even and at least 4 (got {n_nodes})");
            }
            if let Some(m) = modes.iter().find(|&&m| m > n_nodes / 2) {
                bail!("wavenumber {m} exceeds N/2 = {}", n_nodes / 2);
            }
            let set: Vec<String> = reachable_set(n_nodes, &modes).iter().map(|k| k.to_string()).collect();
            println!("{}", set.join(" "));
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { source } => {
            let cfg = source.load()?;
            let diags = validate(&cfg);
            for d in &diags {
                println!("{d}");
            }
            if diags.iter().any(|d| d.severity == Severity::Error) {
                Ok(ExitCode::FAILURE)
            } else {
                if diags.is_empty() {
                    println!("ok");
                }
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Preset { name: None } => {
            for n in preset_names() {
                println!("{n}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Preset { name: Some(name) } => {
            let text = preset_text(&name.to_ascii_uppercase()).with_context(|| format!("unknown preset `{name}`"))?;
            print!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        _ => unreachable!(),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
