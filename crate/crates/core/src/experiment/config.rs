use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::ClassifyConfig;
use crate::drive::DriveSpec;
use crate::dynamics::RegimeParams;
use crate::error::{Error, Result};
use crate::integrate::{IntegratorConfig, Method};
use crate::readout::steady_window;
use crate::shape::{ShapeProtocol, K_MAX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dispersion,
    Battery,
    Classify,
    ShapeCompare,
    Phi0Sweep,
    AlphaTrajectory,
    NoiseRobustness,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Dispersion,
        ExperimentKind::Battery,
        ExperimentKind::Classify,
        ExperimentKind::ShapeCompare,
        ExperimentKind::Phi0Sweep,
        ExperimentKind::AlphaTrajectory,
        ExperimentKind::NoiseRobustness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Battery => "battery",
            ExperimentKind::Classify => "classify",
            ExperimentKind::ShapeCompare => "shape-compare",
            ExperimentKind::Phi0Sweep => "phi0-sweep",
            ExperimentKind::AlphaTrajectory => "alpha-trajectory",
            ExperimentKind::NoiseRobustness => "noise-robustness",
        }
    }

    /// Linear-regime experiments integrate at a fixed RK4 step.
    pub fn is_linear(self) -> bool {
        matches!(self, ExperimentKind::Battery | ExperimentKind::Classify)
    }

    pub fn is_shape(self) -> bool {
        matches!(
            self,
            ExperimentKind::ShapeCompare
                | ExperimentKind::Phi0Sweep
                | ExperimentKind::AlphaTrajectory
                | ExperimentKind::NoiseRobustness
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateConfig {
    pub n_nodes: usize,
    #[serde(default)]
    pub drive_node: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutConfig {
    /// Harmonic whose energy defines the shape observable.
    pub harmonic: usize,
    /// Envelope features average over `t > t_half`; defaults to half the run.
    pub t_half: Option<f64>,
    pub fft_window_s: f64,
    pub fft_overlap: f64,
    pub standardize: bool,
    /// Display spectrogram settings for the battery.
    pub spectrogram_window_s: f64,
    pub spectrogram_chirp_window_s: f64,
    pub spectrogram_hop_s: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            harmonic: 5,
            t_half: None,
            fft_window_s: 4.0,
            fft_overlap: 0.75,
            standardize: false,
            spectrogram_window_s: 4.0,
            spectrogram_chirp_window_s: 1.0,
            spectrogram_hop_s: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapeConfig {
    pub n_phi: usize,
    /// Phases compared by `shape-compare`.
    pub phases: Vec<f64>,
    /// Cubic coefficients for the peak trajectory.
    pub alphas: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub n_seeds: usize,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        Self {
            n_phi: 64,
            phases: vec![0.0, PI / 2.0],
            alphas: Vec::new(),
            snr_db: vec![30.0, 20.0, 10.0, 0.0],
            n_seeds: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub cutoff: f64,
    pub filter_order: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            cutoff: 5.0,
            filter_order: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub n_train: usize,
    pub n_test: usize,
    pub repetitions: usize,
    pub lambda: f64,
    pub snr_db: Vec<f64>,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let d = ClassifyConfig::default();
        Self {
            n_train: d.n_train,
            n_test: d.n_test,
            repetitions: d.repetitions,
            lambda: d.lambda,
            snr_db: d.snr_db,
        }
    }
}

fn default_seed() -> u64 {
    2024
}

/// One experiment run, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub substrate: SubstrateConfig,
    pub regime: RegimeParams,
    #[serde(default)]
    pub drive: Option<DriveSpec>,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default)]
    pub shape: ShapeConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub classify: ClassifySection,
}

const PRESETS: [(&str, &str); 6] = [
    ("F1", include_str!("../../presets/F1.toml")),
    ("F2", include_str!("../../presets/F2.toml")),
    ("F3", include_str!("../../presets/F3.toml")),
    ("F4", include_str!("../../presets/F4.toml")),
    ("F5", include_str!("../../presets/F5.toml")),
    ("F6", include_str!("../../presets/F6.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// The shipped configuration for one figure (`F1`..`F6`, case-insensitive).
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}` (expected F1..F6)")))?;
    ExperimentConfig::from_toml_str(text)
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).map(|(_, t)| *t)
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn t_half(&self) -> f64 {
        self.readout.t_half.unwrap_or(0.5 * self.integrator.span())
    }

    /// Two-tone amplitudes and frequency, when the drive is a two-tone.
    pub fn two_tone(&self) -> Option<(f64, f64, f64)> {
        match self.drive {
            Some(DriveSpec::TwoTone { a1, a2, f_drive, .. }) => Some((a1, a2, f_drive)),
            _ => None,
        }
    }

    pub fn shape_protocol(&self) -> Result<ShapeProtocol> {
        let (a1, a2, f_drive) = self
            .two_tone()
            .ok_or_else(|| Error::Config("shape experiments need a two-tone drive".into()))?;
        Ok(ShapeProtocol {
            n_nodes: self.substrate.n_nodes,
            params: self.regime,
            a1,
            a2,
            f_drive,
            drive_node: self.substrate.drive_node,
            integrator: self.integrator.clone(),
            harmonic: self.readout.harmonic,
            noise_cutoff: self.noise.cutoff,
            noise_filter_order: self.noise.filter_order,
        })
    }

    pub fn classify_config(&self) -> ClassifyConfig {
        ClassifyConfig {
            n_nodes: self.substrate.n_nodes,
            params: self.regime,
            dt: self.integrator.dt_fixed.unwrap_or(self.integrator.output_dt),
            t_total: self.integrator.span(),
            drive_node: self.substrate.drive_node,
            t_half: self.t_half(),
            n_train: self.classify.n_train,
            n_test: self.classify.n_test,
            repetitions: self.classify.repetitions,
            lambda: self.classify.lambda,
            fft_window_s: self.readout.fft_window_s,
            fft_overlap: self.readout.fft_overlap,
            standardize: self.readout.standardize,
            snr_db: self.classify.snr_db.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

struct Diags(Vec<Diagnostic>);

impl Diags {
    fn error(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            field: field.into(),
            message: message.into(),
        });
    }
}

/// Cross-field checks. Errors block a run; warnings do not.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut d = Diags(Vec::new());
    let n = cfg.substrate.n_nodes;
    if n % 2 == 1 {
        d.error("substrate.n_nodes", format!("N must be even (got {n})"));
    } else if n < 4 {
        d.error("substrate.n_nodes", format!("N must be at least 4 (got {n})"));
    }
    if cfg.substrate.drive_node >= n.max(1) {
        d.error(
            "substrate.drive_node",
            format!("node {} does not exist on a ring of {n}", cfg.substrate.drive_node),
        );
    }
    if let Err(e) = cfg.regime.validate() {
        d.error("regime", e.to_string());
    }
    if let Err(e) = cfg.integrator.validate() {
        d.error("integrator", e.to_string());
    }
    if let Some(w) = cfg.workers {
        if w == 0 {
            d.error("workers", "must be at least 1");
        }
    }
    if let Some(drive) = &cfg.drive {
        if let Err(e) = drive.validate() {
            d.error("drive", e.to_string());
        }
    }

    let kind = cfg.experiment;
    if kind.is_linear() {
        if !cfg.regime.is_linear() {
            d.error(
                "regime.alpha",
                format!("{kind} runs in the linear regime and needs alpha = 0"),
            );
        }
        if cfg.integrator.method != Method::Rk4 {
            d.error("integrator.method", format!("{kind} integrates with fixed-step rk4"));
        }
    }
    if kind == ExperimentKind::Classify {
        let c = cfg.classify_config();
        if let Err(e) = c.validate() {
            d.error("classify", e.to_string());
        }
        if (c.dt - cfg.integrator.output_dt).abs() > 1e-12 * c.dt {
            d.error(
                "integrator.output_dt",
                "classification features need output_dt equal to the rk4 step",
            );
        }
    }
    if kind.is_shape() {
        if cfg.integrator.method == Method::Rk4 {
            d.error(
                "integrator.method",
                format!("{kind} uses adaptive integration in node coordinates (rk45 or dop853)"),
            );
        }
        match cfg.two_tone() {
            None => d.error("drive", "shape experiments need a two-tone drive"),
            Some((_, _, f)) => match steady_window(cfg.integrator.span(), f, cfg.integrator.output_dt) {
                Err(e) => d.error("integrator.t_end", e.to_string()),
                Ok(w) => {
                    if K_MAX * w.n_ss > w.length / 2 {
                        d.error(
                            "integrator.output_dt",
                            format!("harmonic {K_MAX} lies beyond the window's Nyquist bin"),
                        );
                    }
                }
            },
        }
        if cfg.readout.harmonic == 0 || cfg.readout.harmonic > K_MAX {
            d.error("readout.harmonic", format!("must lie in 1..={K_MAX}"));
        }
        if cfg.integrator.t_start != 0.0 {
            d.error("integrator.t_start", "shape runs start from rest at t = 0");
        }
    }
    if matches!(
        kind,
        ExperimentKind::Phi0Sweep | ExperimentKind::AlphaTrajectory | ExperimentKind::NoiseRobustness
    ) {
        let np = cfg.shape.n_phi;
        if np < 4 || np % 2 == 1 {
            d.error("shape.n_phi", format!("need an even grid of at least 4 points (got {np})"));
        }
    }
    if kind == ExperimentKind::Phi0Sweep && (cfg.integrator.method != Method::Dop853 || cfg.integrator.rtol > 1e-10) {
        d.warn(
            "integrator",
            "Sym-II residual acceptance requires DOP853 at rtol 1e-10; looser settings blur the pi-periodicity check",
        );
    }
    if kind == ExperimentKind::AlphaTrajectory && cfg.shape.alphas.is_empty() {
        d.error("shape.alphas", "alpha-trajectory needs at least one alpha");
    }
    if matches!(kind, ExperimentKind::Phi0Sweep | ExperimentKind::AlphaTrajectory) {
        if let Some(a) = cfg.shape.alphas.iter().find(|a| !(**a > 0.0)) {
            d.error("shape.alphas", format!("alpha values must be positive (got {a})"));
        }
    }
    if kind == ExperimentKind::ShapeCompare && cfg.shape.phases.is_empty() {
        d.error("shape.phases", "need at least one phase");
    }
    if kind == ExperimentKind::NoiseRobustness {
        if cfg.shape.snr_db.is_empty() || cfg.shape.n_seeds == 0 {
            d.error("shape.snr_db", "need a non-empty SNR grid and at least one seed");
        }
        let nyquist = 0.5 / cfg.integrator.output_dt;
        if !(cfg.noise.cutoff > 0.0 && cfg.noise.cutoff < nyquist) {
            d.error(
                "noise.cutoff",
                format!("f_c = {} must lie below the storage-grid Nyquist {nyquist}", cfg.noise.cutoff),
            );
        }
        if cfg.noise.filter_order == 0 || cfg.noise.filter_order % 2 == 1 {
            d.error("noise.filter_order", "must be a positive even order");
        }
        if cfg.shape.n_seeds < 2 {
            d.warn("shape.n_seeds", "a single seed gives no spread estimate");
        }
    }
    if kind == ExperimentKind::Battery && cfg.integrator.span() <= 0.0 {
        d.error("integrator.t_end", "battery needs a positive duration");
    }
    d.0
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
