//! Declarative experiment runner: a TOML config in, CSV artifacts plus a
//! checksummed JSON manifest out.

mod config;
mod table;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{
    has_errors, preset, preset_names, preset_text, validate, ClassifySection, Diagnostic, ExperimentConfig, ExperimentKind,
    NoiseConfig, ReadoutConfig, Severity, ShapeConfig, SubstrateConfig,
};
pub use table::{format_float, Cell, Table};

use crate::classify::{run_snr_sweep, FeatureMethod};
use crate::drive::{make_noise, DriveSpec, RNG_ALGORITHM};
use crate::dynamics::{mode_rhs_linear, RegimeParams};
use crate::error::{Error, Result};
use crate::integrate::integrate;
use crate::readout::{spectrogram, wavenumber_envelopes, HarmonicEnergies, ModeTrajectory};
use crate::shape::{
    alpha_trajectory, noise_robustness, phase_grid, reconstruct_and_peak, sweep_shape, trig_interpolate, AlphaPoint, ShapeSweep,
    FINE_GRID, K_MAX,
};
use crate::substrate::{Parity, RingSubstrate};

/// Worker-count override read by the command-line front end.
pub const WORKERS_ENV: &str = "DUFFING_RING_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn csv(name: &str, table: &Table) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            contents: table.to_bytes()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskSeed {
    pub task: String,
    pub seed: u64,
}

/// Everything an experiment produces before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
    pub seeds: Vec<TaskSeed>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool: String,
    pub version: String,
    pub rng_algorithm: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub master_seed: u64,
    pub workers: usize,
    pub seeds: Vec<TaskSeed>,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
    pub summary: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Content hash of the configuration's canonical JSON form.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let canon = serde_json::to_vec(cfg).map_err(|e| Error::Config(e.to_string()))?;
    Ok(sha256_hex(&canon))
}

fn energy_header(lead: &[&str]) -> Vec<String> {
    lead.iter()
        .map(|s| s.to_string())
        .chain((1..=K_MAX).map(|k| format!("E{k}")))
        .collect()
}

fn energy_row(lead: Vec<Cell>, e: &HarmonicEnergies) -> Vec<Cell> {
    lead.into_iter().chain(e.energies.iter().map(|&v| Cell::F(v))).collect()
}

fn sweep_table(sweep: &ShapeSweep) -> Table {
    let mut t = Table::new(&energy_header(&["delta_phi2"]));
    for (phi, e) in sweep.delta_phi2.iter().zip(&sweep.energies) {
        t.push(energy_row(vec![Cell::F(*phi)], e));
    }
    t
}

fn alpha_table(points: &[AlphaPoint]) -> Table {
    let mut t = Table::new(&["alpha", "phi0", "phi0_over_pi", "sym1_ratio", "sym2_residual", "flat"]);
    for p in points {
        t.push([
            Cell::F(p.alpha),
            p.estimate.phi0.into(),
            p.estimate.phi0.map(|v| v / PI).into(),
            Cell::F(p.estimate.sym1_ratio),
            Cell::F(p.estimate.sym2_residual),
            Cell::from(if p.estimate.flat { "true" } else { "false" }),
        ]);
    }
    t
}

fn alpha_summary(points: &[AlphaPoint]) -> Value {
    let phis: Vec<Option<f64>> = points.iter().map(|p| p.estimate.phi0).collect();
    let monotone = phis.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b >= a));
    json!({
        "alphas": points.iter().map(|p| p.alpha).collect::<Vec<_>>(),
        "phi0_over_pi": phis.iter().map(|p| p.map(|v| v / PI)).collect::<Vec<_>>(),
        "monotone_non_decreasing": monotone,
    })
}

/// Canonical linear-regime drives: tone at mode 5, chirp from mode 1 to 12,
/// burst and FM tone at mode 8, each with its display-window length.
pub fn battery_drives(
    sub: &RingSubstrate,
    params: &RegimeParams,
    duration: f64,
    readout: &ReadoutConfig,
) -> Vec<(&'static str, DriveSpec, f64)> {
    let w = sub.dispersion(params);
    let win = readout.spectrogram_window_s;
    vec![
        ("tone", DriveSpec::PureTone { omega: w[5], phase: 0.0 }, win),
        (
            "chirp",
            DriveSpec::Chirp {
                omega_start: w[1],
                omega_end: w[12.min(w.len() - 1)],
                duration,
            },
            readout.spectrogram_chirp_window_s,
        ),
        (
            "burst",
            DriveSpec::GaussianBurst {
                omega_carrier: w[8],
                t_center: 0.5 * duration,
                sigma: 1.2,
            },
            win,
        ),
        (
            "fm",
            DriveSpec::FmTone {
                omega_carrier: w[8],
                omega_mod: 0.4,
                depth: 0.25,
            },
            win,
        ),
    ]
}

fn run_dispersion(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let sub = RingSubstrate::new(cfg.substrate.n_nodes)?;
    let lin = sub.dispersion(&RegimeParams::LINEAR);
    let duf = sub.dispersion(&RegimeParams::DUFFING);
    let own = sub.dispersion(&cfg.regime);
    let mut t = Table::new(&[
        "n",
        "lambda_n",
        "omega_n_linear",
        "omega_n_duffing",
        "omega_n_config",
        "sqrt_lambda_n",
    ]);
    for n in 0..=sub.n_nodes() / 2 {
        let lam = crate::substrate::laplacian_eigenvalue(sub.n_nodes(), n);
        t.push([
            Cell::from(n),
            lam.into(),
            lin[n].into(),
            duf[n].into(),
            own[n].into(),
            lam.sqrt().into(),
        ]);
    }
    let mut modes = Table::new(&["node", "column", "wavenumber", "parity", "value"]);
    for (c, m) in sub.modes().iter().enumerate() {
        let parity = match m.parity {
            Parity::Uniform => "uniform",
            Parity::Cosine => "cos",
            Parity::Sine => "sin",
            Parity::Nyquist => "nyquist",
        };
        for j in 0..sub.n_nodes() {
            modes.push([
                Cell::from(j),
                c.into(),
                m.wavenumber.into(),
                parity.into(),
                sub.basis_entry(j, c).into(),
            ]);
        }
    }
    Ok(RunOutput {
        artifacts: vec![Artifact::csv("dispersion.csv", &t)?, Artifact::csv("eigenmodes.csv", &modes)?],
        summary: json!({
            "n_nodes": sub.n_nodes(),
            "omega_nyquist_over_omega0_linear": lin[sub.n_nodes() / 2] / RegimeParams::LINEAR.k_c.sqrt(),
        }),
        seeds: Vec::new(),
        failures: Vec::new(),
    })
}

fn run_battery(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let sub = RingSubstrate::new(cfg.substrate.n_nodes)?;
    let icfg = &cfg.integrator;
    let drives = battery_drives(&sub, &cfg.regime, icfg.span(), &cfg.readout);
    let results = drives
        .par_iter()
        .map(|(name, drive, window)| {
            let rhs = mode_rhs_linear(&sub, cfg.regime, cfg.substrate.drive_node, |t| Ok(drive.eval(t)))?;
            let traj = integrate(rhs, &vec![0.0; 2 * sub.n_nodes()], icfg)?;
            let mt = ModeTrajectory::from_mode_states(&traj, sub.n_nodes())?;
            let env = wavenumber_envelopes(&sub, &mt);
            let signal: Vec<f64> = mt.times().iter().map(|&t| drive.eval(t)).collect();
            let spec = spectrogram(&signal, traj.dt(), *window, cfg.readout.spectrogram_hop_s)?;

            let mut d = Table::new(&["t", "s"]);
            for (t, s) in mt.times().iter().zip(&signal) {
                d.push([*t, *s]);
            }
            let mut e = Table::new(&["t", "n", "envelope"]);
            for (i, t) in mt.times().iter().enumerate() {
                for (k, series) in env.iter().enumerate() {
                    e.push([Cell::F(*t), Cell::from(k + 1), Cell::F(series[i])]);
                }
            }
            let mut s = Table::new(&["t", "f", "magnitude_db"]);
            for (row, t) in spec.mags.iter().zip(&spec.times) {
                for (m, f) in row.iter().zip(&spec.freqs) {
                    s.push([*t, *f, 20.0 * (m + 1e-300).log10()]);
                }
            }
            let mean: Vec<f64> = env.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
            let peak = mean.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i + 1);
            Ok((
                vec![
                    Artifact::csv(&format!("battery_{name}_drive.csv"), &d)?,
                    Artifact::csv(&format!("battery_{name}_envelope.csv"), &e)?,
                    Artifact::csv(&format!("battery_{name}_spectrogram.csv"), &s)?,
                ],
                json!({ "drive": name, "drive_spec": drive, "peak_wavenumber": peak, "spectrogram_window_s": window }),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (artifacts, summary): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(RunOutput {
        artifacts: artifacts.into_iter().flatten().collect(),
        summary: json!({ "drives": summary }),
        seeds: Vec::new(),
        failures: Vec::new(),
    })
}

fn run_classify(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ccfg = cfg.classify_config();
    let sweep = run_snr_sweep(&ccfg, cfg.seed)?;
    let mut t = Table::new(&["snr_db", "method", "mean_acc", "std_acc", "n_reps"]);
    let mut reps = Table::new(&["snr_db", "method", "rep", "seed", "accuracy"]);
    let mut seeds = Vec::new();
    for (si, row) in sweep.rows.iter().enumerate() {
        for m in [FeatureMethod::Reservoir, FeatureMethod::Fft] {
            let st = row.stats(m);
            t.push([
                Cell::F(row.snr_db),
                m.label().into(),
                st.mean.into(),
                st.std.into(),
                st.per_rep.len().into(),
            ]);
            for (r, acc) in st.per_rep.iter().enumerate() {
                reps.push([
                    Cell::F(row.snr_db),
                    m.label().into(),
                    r.into(),
                    row.seeds[r].into(),
                    (*acc).into(),
                ]);
            }
        }
        for (r, &seed) in row.seeds.iter().enumerate() {
            seeds.push(TaskSeed {
                task: format!("classify/snr{si}/rep{r}"),
                seed,
            });
        }
    }
    let gap = match (sweep.reservoir_crossing_db, sweep.fft_crossing_db) {
        (Some(r), Some(f)) => Some(f - r),
        _ => None,
    };
    Ok(RunOutput {
        artifacts: vec![Artifact::csv("classify.csv", &t)?, Artifact::csv("classify_reps.csv", &reps)?],
        summary: json!({
            "reservoir_crossing_90_db": sweep.reservoir_crossing_db,
            "fft_crossing_90_db": sweep.fft_crossing_db,
            "crossing_gap_db": gap,
            "chance": 0.25,
        }),
        seeds,
        failures: Vec::new(),
    })
}

fn run_shape_compare(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let base = cfg.shape_protocol()?;
    let sub = RingSubstrate::new(base.n_nodes)?;
    let regimes = [("linear", base.params.with_alpha(0.0)), ("duffing", base.params)];
    let tasks: Vec<(usize, usize)> = (0..regimes.len())
        .flat_map(|r| (0..cfg.shape.phases.len()).map(move |p| (r, p)))
        .collect();
    let energies = tasks
        .par_iter()
        .map(|&(r, p)| {
            let mut proto = base.clone();
            proto.params = regimes[r].1;
            proto.energies(&sub, cfg.shape.phases[p], None)
        })
        .collect::<Result<Vec<_>>>()?;

    let h = base.harmonic;
    let mut t = Table::new(
        &energy_header(&["regime", "delta_phi2"])
            .into_iter()
            .chain(["Eh_ratio".to_string()])
            .collect::<Vec<_>>(),
    );
    let mut ratios = serde_json::Map::new();
    for (r, (name, _)) in regimes.iter().enumerate() {
        let first = energies[r * cfg.shape.phases.len()].get(h);
        for (p, phi) in cfg.shape.phases.iter().enumerate() {
            let e = &energies[r * cfg.shape.phases.len() + p];
            let mut row = energy_row(vec![Cell::from(*name), Cell::F(*phi)], e);
            row.push(Cell::F(e.get(h) / first));
            t.push(row);
        }
        let last = energies[(r + 1) * cfg.shape.phases.len() - 1].get(h);
        ratios.insert(name.to_string(), json!(last / first));
    }
    let lin_first = &energies[0];
    let lin_last = &energies[cfg.shape.phases.len() - 1];
    let lin_rel: Vec<f64> = (1..=2)
        .map(|k| (lin_last.get(k) - lin_first.get(k)).abs() / lin_first.get(k))
        .collect();
    let lin_floor = (3..=K_MAX)
        .map(|k| lin_first.get(k).max(lin_last.get(k)) / lin_first.get(1))
        .fold(0.0, f64::max);

    let period = 1.0 / base.f_drive;
    let n = (2.0 * period / base.integrator.output_dt).round() as usize;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..cfg.shape.phases.len()).map(|p| format!("s_{p}")))
        .collect();
    let mut d = Table::new(&header);
    for i in 0..=n {
        let tt = i as f64 * base.integrator.output_dt;
        d.push(std::iter::once(tt).chain(cfg.shape.phases.iter().map(|&phi| base.drive(phi).eval(tt))));
    }

    Ok(RunOutput {
        artifacts: vec![
            Artifact::csv("shape_compare.csv", &t)?,
            Artifact::csv("shape_drives.csv", &d)?,
        ],
        summary: json!({
            "harmonic": h,
            "phases": cfg.shape.phases,
            "eh_ratio_last_over_first": ratios,
            "linear_rel_diff_e1_e2": lin_rel,
            "linear_max_higher_over_e1": lin_floor,
            "n_ss": base.window()?.n_ss,
        }),
        seeds: Vec::new(),
        failures: Vec::new(),
    })
}

fn run_phi0_sweep(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let proto = cfg.shape_protocol()?;
    let sweep = sweep_shape(&proto, cfg.shape.n_phi, None)?;
    let samples = sweep.samples();
    let est = reconstruct_and_peak(&samples, FINE_GRID)?;

    let mut coeffs = Table::new(&["n", "a_n", "b_n", "abs_a_n", "abs_b_n"]);
    for (n, (a, b)) in est.a.iter().zip(&est.b).enumerate() {
        coeffs.push([Cell::from(n), (*a).into(), (*b).into(), a.abs().into(), b.abs().into()]);
    }
    let mut recon = Table::new(&["delta_phi2", "reconstruction"]);
    for phi in phase_grid(FINE_GRID) {
        recon.push([phi, trig_interpolate(&samples, phi)]);
    }
    let mut artifacts = vec![
        Artifact::csv("phi0_sweep.csv", &sweep_table(&sweep))?,
        Artifact::csv("phi0_fourier.csv", &coeffs)?,
        Artifact::csv("phi0_reconstruction.csv", &recon)?,
    ];
    let mut summary = json!({
        "harmonic": proto.harmonic,
        "n_phi": cfg.shape.n_phi,
        "phi0": est.phi0,
        "phi0_over_pi": est.phi0.map(|v| v / PI),
        "raw_argmax": est.raw_argmax,
        "flat": est.flat,
        "sym1_ratio": est.sym1_ratio,
        "sym2_residual": est.sym2_residual,
        "odd_even_decades": est.odd_even_decades,
        "alpha": proto.params.alpha,
    });
    if !cfg.shape.alphas.is_empty() {
        let points = alpha_trajectory(&proto, &cfg.shape.alphas, cfg.shape.n_phi)?;
        artifacts.push(Artifact::csv("alpha_trajectory.csv", &alpha_table(&points))?);
        summary["alpha_trajectory"] = alpha_summary(&points);
    }
    Ok(RunOutput {
        artifacts,
        summary,
        seeds: Vec::new(),
        failures: Vec::new(),
    })
}

fn run_alpha_trajectory(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let proto = cfg.shape_protocol()?;
    let points = alpha_trajectory(&proto, &cfg.shape.alphas, cfg.shape.n_phi)?;
    let mut sweeps = Table::new(&energy_header(&["alpha", "delta_phi2"]));
    for p in &points {
        for (phi, e) in p.sweep.delta_phi2.iter().zip(&p.sweep.energies) {
            sweeps.push(energy_row(vec![Cell::F(p.alpha), Cell::F(*phi)], e));
        }
    }
    Ok(RunOutput {
        artifacts: vec![
            Artifact::csv("alpha_trajectory.csv", &alpha_table(&points))?,
            Artifact::csv("alpha_sweeps.csv", &sweeps)?,
        ],
        summary: alpha_summary(&points),
        seeds: Vec::new(),
        failures: Vec::new(),
    })
}

fn run_noise_robustness(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let proto = cfg.shape_protocol()?;
    let result = noise_robustness(&proto, &cfg.shape.snr_db, cfg.shape.n_seeds, cfg.shape.n_phi, cfg.seed)?;
    let reference = sweep_shape(&proto, cfg.shape.n_phi, None)?;
    let ref_est = reconstruct_and_peak(&reference.samples(), FINE_GRID)?;

    let mut cells = Table::new(&["snr_db", "seed_index", "seed", "phi0", "mean", "std", "error"]);
    let mut seeds = Vec::new();
    let mut failures = Vec::new();
    for c in &result.cells {
        let agg = result
            .aggregates
            .iter()
            .find(|a| a.snr_db == c.snr_db)
            .expect("aggregate per SNR");
        cells.push([
            Cell::F(c.snr_db),
            c.seed_index.into(),
            c.seed.into(),
            c.phi0.into(),
            agg.mean.into(),
            agg.std.into(),
            c.error.clone().into(),
        ]);
        let si = cfg.shape.snr_db.iter().position(|s| *s == c.snr_db).unwrap_or(0);
        seeds.push(TaskSeed {
            task: format!("noise-robustness/snr{si}/seed{}", c.seed_index),
            seed: c.seed,
        });
        if let Some(e) = &c.error {
            failures.push(format!("snr {} dB, seed {}: {e}", c.snr_db, c.seed_index));
        }
    }
    let mut agg = Table::new(&["snr_db", "mean", "std", "mean_over_pi", "std_over_pi", "n_ok", "n_failed"]);
    for a in &result.aggregates {
        agg.push([
            Cell::F(a.snr_db),
            a.mean.into(),
            a.std.into(),
            (a.mean / PI).into(),
            (a.std / PI).into(),
            a.n_ok.into(),
            a.n_failed.into(),
        ]);
    }
    let mut refs = Table::new(&["name", "phi0"]);
    refs.push([Cell::from("noise_free"), ref_est.phi0.into()]);
    refs.push([Cell::from("symmetric_attractor"), Cell::F(PI / 2.0)]);

    Ok(RunOutput {
        artifacts: vec![
            Artifact::csv("noise_cells.csv", &cells)?,
            Artifact::csv("noise_summary.csv", &agg)?,
            Artifact::csv("noise_reference.csv", &refs)?,
            Artifact::csv("noise_reference_sweep.csv", &sweep_table(&reference))?,
        ],
        summary: json!({
            "threshold_2sigma_db": result.threshold_db,
            "reference_phi0": ref_est.phi0,
            "reference_phi0_over_pi": ref_est.phi0.map(|v| v / PI),
            "aggregates": result.aggregates,
        }),
        seeds,
        failures,
    })
}

/// Runs the configured experiment in memory on the current thread pool.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.experiment {
        ExperimentKind::Dispersion => run_dispersion(cfg),
        ExperimentKind::Battery => run_battery(cfg),
        ExperimentKind::Classify => run_classify(cfg),
        ExperimentKind::ShapeCompare => run_shape_compare(cfg),
        ExperimentKind::Phi0Sweep => run_phi0_sweep(cfg),
        ExperimentKind::AlphaTrajectory => run_alpha_trajectory(cfg),
        ExperimentKind::NoiseRobustness => run_noise_robustness(cfg),
    }
}

/// Validates, executes on a pool of `cfg.workers` threads, then writes every
/// artifact, `summary.json` and `manifest.json` into `out_dir`. Nothing is
/// written when validation or execution fails.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    let diags = validate(cfg);
    if has_errors(&diags) {
        let msg: Vec<String> = diags
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.to_string())
            .collect();
        return Err(Error::Config(msg.join("; ")));
    }
    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let output = pool.install(|| execute(cfg))?;
    let wall = start.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let summary_bytes = serde_json::to_vec_pretty(&output.summary).map_err(|e| Error::Config(e.to_string()))?;
    let summary = Artifact {
        name: "summary.json".into(),
        contents: summary_bytes,
    };
    for a in output.artifacts.iter().chain(std::iter::once(&summary)) {
        fs::write(out_dir.join(&a.name), &a.contents)?;
        files.push(FileEntry {
            path: a.name.clone(),
            bytes: a.contents.len() as u64,
            sha256: sha256_hex(&a.contents),
        });
    }
    let manifest = RunManifest {
        experiment: cfg.experiment.to_string(),
        tool: "duffing-ring".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        rng_algorithm: RNG_ALGORITHM.into(),
        config: cfg.clone(),
        config_sha256: config_hash(cfg)?,
        master_seed: cfg.seed,
        workers,
        seeds: output.seeds,
        wall_time_s: wall,
        files,
        warnings: diags.iter().map(|d| d.to_string()).collect(),
        failures: output.failures,
        summary: output.summary,
    };
    let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(out_dir.join("manifest.json"), bytes)?;
    Ok(manifest)
}

/// The configured drive on the output grid, optionally with band-limited noise
/// at `snr_db` (power convention, referenced to the two-tone signal scale).
pub fn emit_drive(cfg: &ExperimentConfig, snr_db: Option<f64>) -> Result<Table> {
    let drive = cfg
        .drive
        .ok_or_else(|| Error::Config("config has no [drive] section".into()))?;
    drive.validate()?;
    let icfg = &cfg.integrator;
    icfg.validate()?;
    let noise = match snr_db {
        None => None,
        Some(snr) => {
            let scale = match drive {
                DriveSpec::TwoTone { a1, a2, .. } => crate::drive::two_tone_signal_scale(a1, a2),
                _ => 1.0,
            };
            let mut proto_noise = crate::drive::NoiseSpec {
                snr_db: snr,
                convention: crate::drive::SnrConvention::Power,
                cutoff: cfg.noise.cutoff,
                filter_order: cfg.noise.filter_order,
                seed: crate::seeds::derive_seed(cfg.seed, "emit-drive", &[]),
                grid_dt: icfg.output_dt,
                total_time: icfg.t_end,
            };
            if !matches!(drive, DriveSpec::TwoTone { .. }) {
                proto_noise.convention = crate::drive::SnrConvention::Amplitude;
            }
            Some(make_noise(&proto_noise, scale)?)
        }
    };
    let mut t = Table::new(&["t", "s"]);
    for i in 0..icfg.n_outputs() {
        let tt = icfg.output_time(i);
        let n = match &noise {
            Some(nz) => nz.eval(tt)?,
            None => 0.0,
        };
        t.push([tt, drive.eval(tt) + n]);
    }
    Ok(t)
}
