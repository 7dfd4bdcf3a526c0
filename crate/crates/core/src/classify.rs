//! Four-class tone detection in noise: reservoir envelope features against a
//! windowed-FFT baseline, both read out by the same ridge classifier.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mode_rhs_linear, RegimeParams};
use crate::error::{invalid, Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::readout::{fft_baseline_features, reservoir_features, ModeTrajectory};
use crate::seeds::derive_seed;
use crate::shape::mean_and_sample_std;
use crate::substrate::RingSubstrate;

/// Class index to tone wavenumber; class 0 is noise only.
pub const CLASS_WAVENUMBERS: [Option<usize>; 4] = [None, Some(3), Some(7), Some(11)];
pub const N_CLASSES: usize = CLASS_WAVENUMBERS.len();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub n_nodes: usize,
    pub params: RegimeParams,
    pub dt: f64,
    pub t_total: f64,
    pub drive_node: usize,
    pub t_half: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub repetitions: usize,
    pub lambda: f64,
    pub fft_window_s: f64,
    pub fft_overlap: f64,
    pub standardize: bool,
    pub snr_db: Vec<f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            n_nodes: 32,
            params: RegimeParams::LINEAR,
            dt: 0.01,
            t_total: 16.0,
            drive_node: 0,
            t_half: 8.0,
            n_train: 200,
            n_test: 200,
            repetitions: 5,
            lambda: 1e-3,
            fft_window_s: 4.0,
            fft_overlap: 0.75,
            standardize: false,
            snr_db: (0..11).map(|i| -24.0 + 2.4 * i as f64).collect(),
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        RingSubstrate::new(self.n_nodes)?;
        self.params.validate()?;
        if !self.params.is_linear() {
            return Err(invalid("params.alpha", "the classification bench runs in the linear regime"));
        }
        if self.n_nodes / 2 < 11 {
            return Err(invalid("n_nodes", "wavenumber 11 must exist on the ring"));
        }
        if !(self.dt > 0.0 && self.t_total > self.t_half && self.t_half >= 0.0) {
            return Err(invalid("t_half", "need 0 <= t_half < t_total and dt > 0"));
        }
        if self.n_train == 0 || self.n_test == 0 || self.repetitions == 0 {
            return Err(invalid("n_train", "trial and repetition counts must be positive"));
        }
        if !(self.lambda > 0.0) {
            return Err(invalid("lambda", "must be positive"));
        }
        if self.snr_db.is_empty() {
            return Err(invalid("snr_db", "grid is empty"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    /// Angular frequency of each tone class's wavenumber.
    pub fn tone_omega(&self, wavenumber: usize) -> f64 {
        (self.params.omega0_sq + self.params.k_c * crate::substrate::laplacian_eigenvalue(self.n_nodes, wavenumber)).sqrt()
    }

    /// `omega_n / 2 pi` for `n = 1..=N/2`.
    pub fn feature_freqs(&self) -> Vec<f64> {
        (1..=self.n_nodes / 2).map(|n| self.tone_omega(n) / (2.0 * PI)).collect()
    }
}

/// `10^(-SNR/20)`.
pub fn noise_amplitude(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub label: usize,
    pub omega: Option<f64>,
    pub phase: f64,
    pub seed: u64,
    pub snr_db: f64,
    pub noise_amplitude: f64,
    /// Unit-variance white noise on the integration grid, held between samples.
    pub eta: Vec<f64>,
    pub dt: f64,
}

impl Trial {
    pub fn eval(&self, t: f64) -> f64 {
        let idx = ((t / self.dt + 1e-9).floor().max(0.0) as usize).min(self.eta.len() - 1);
        self.tone(t) + self.noise_amplitude * self.eta[idx]
    }

    fn tone(&self, t: f64) -> f64 {
        self.omega.map_or(0.0, |w| (w * t + self.phase).cos())
    }

    /// The input sampled on the integration grid.
    pub fn samples(&self) -> Vec<f64> {
        self.eta
            .iter()
            .enumerate()
            .map(|(i, e)| self.tone(i as f64 * self.dt) + self.noise_amplitude * e)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSet {
    pub trials: Vec<Trial>,
}

impl TrialSet {
    pub fn labels(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.label).collect()
    }
}

fn make_trial(cfg: &ClassifyConfig, snr_db: f64, label: usize, seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rng.random_range(0.0..2.0 * PI);
    let eta = (0..=cfg.n_steps()).map(|_| rng.sample(StandardNormal)).collect();
    Trial {
        label,
        omega: CLASS_WAVENUMBERS[label].map(|n| cfg.tone_omega(n)),
        phase,
        seed,
        snr_db,
        noise_amplitude: noise_amplitude(snr_db),
        eta,
        dt: cfg.dt,
    }
}

/// Balanced train and test sets; trial `i` has class `i % 4` and its own seed.
pub fn gen_trials(cfg: &ClassifyConfig, snr_db: f64, n_train: usize, n_test: usize, seed: u64) -> (TrialSet, TrialSet) {
    let build = |offset: usize, count: usize| TrialSet {
        trials: (0..count)
            .map(|i| {
                let idx = (offset + i) as u64;
                make_trial(cfg, snr_db, i % N_CLASSES, derive_seed(seed, "trial", &[idx]))
            })
            .collect(),
    };
    (build(0, n_train), build(n_train, n_test))
}

/// Mean pair-combined mode envelope after `t_half` of a linear-ring simulation.
pub fn trial_reservoir_features(cfg: &ClassifyConfig, sub: &RingSubstrate, trial: &Trial) -> Result<Vec<f64>> {
    let rhs = mode_rhs_linear(sub, cfg.params, cfg.drive_node, |t| Ok(trial.eval(t)))?;
    let icfg = IntegratorConfig::rk4(cfg.dt, cfg.t_total, cfg.dt);
    let traj = integrate(rhs, &vec![0.0; 2 * sub.n_nodes()], &icfg)?;
    let mt = ModeTrajectory::from_mode_states(&traj, sub.n_nodes())?;
    Ok(reservoir_features(sub, &mt, cfg.t_half))
}

pub fn trial_fft_features(cfg: &ClassifyConfig, trial: &Trial) -> Result<Vec<f64>> {
    fft_baseline_features(
        &trial.samples(),
        cfg.dt,
        &cfg.feature_freqs(),
        cfg.fft_window_s,
        cfg.fft_overlap,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    /// `features x classes`.
    pub weights: DMatrix<f64>,
    pub lambda: f64,
}

/// `W = (F^T F + lambda I)^-1 F^T Y`, no intercept.
pub fn train_ridge(features: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<RidgeModel> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", "must be positive"));
    }
    if features.nrows() != targets.nrows() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            got: targets.nrows(),
        });
    }
    let ft = features.transpose();
    let mut gram = &ft * features;
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let rhs = &ft * targets;
    let weights = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).ok_or(Error::Singular)?,
    };
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(RidgeModel { weights, lambda })
}

impl RidgeModel {
    pub fn scores(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        features * &self.weights
    }

    /// Row-wise argmax; ties go to the lowest class index.
    pub fn predict(&self, features: &DMatrix<f64>) -> Vec<usize> {
        let s = self.scores(features);
        (0..s.nrows())
            .map(|r| {
                let mut best = 0;
                for c in 1..s.ncols() {
                    if s[(r, c)] > s[(r, best)] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

pub fn one_hot(labels: &[usize], n_classes: usize) -> DMatrix<f64> {
    DMatrix::from_fn(labels.len(), n_classes, |r, c| if labels[r] == c { 1.0 } else { 0.0 })
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c])
}

pub fn accuracy(pred: &[usize], labels: &[usize]) -> f64 {
    let hits = pred.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

/// Z-scores columns with statistics from `train`; constant columns are only centred.
fn standardize(train: &mut DMatrix<f64>, test: &mut DMatrix<f64>) {
    for c in 0..train.ncols() {
        let col: Vec<f64> = train.column(c).iter().copied().collect();
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / col.len() as f64).sqrt();
        let scale = if sd > 0.0 { 1.0 / sd } else { 1.0 };
        for m in [&mut *train, &mut *test] {
            for v in m.column_mut(c).iter_mut() {
                *v = (*v - mean) * scale;
            }
        }
    }
}

/// Train on one set, score on the other.
pub fn evaluate(
    train: &[Vec<f64>],
    train_labels: &[usize],
    test: &[Vec<f64>],
    test_labels: &[usize],
    lambda: f64,
    std: bool,
) -> Result<f64> {
    let mut f_train = rows_to_matrix(train);
    let mut f_test = rows_to_matrix(test);
    if std {
        standardize(&mut f_train, &mut f_test);
    }
    let model = train_ridge(&f_train, &one_hot(train_labels, N_CLASSES), lambda)?;
    Ok(accuracy(&model.predict(&f_test), test_labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMethod {
    Reservoir,
    Fft,
}

impl FeatureMethod {
    pub fn label(self) -> &'static str {
        match self {
            FeatureMethod::Reservoir => "reservoir",
            FeatureMethod::Fft => "fft",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyStats {
    pub mean: f64,
    /// Sample standard deviation across repetitions.
    pub std: f64,
    pub per_rep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrRow {
    pub snr_db: f64,
    pub seeds: Vec<u64>,
    pub reservoir: AccuracyStats,
    pub fft: AccuracyStats,
}

impl SnrRow {
    pub fn stats(&self, m: FeatureMethod) -> &AccuracyStats {
        match m {
            FeatureMethod::Reservoir => &self.reservoir,
            FeatureMethod::Fft => &self.fft,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrSweep {
    pub rows: Vec<SnrRow>,
    pub reservoir_crossing_db: Option<f64>,
    pub fft_crossing_db: Option<f64>,
}

/// Per-trial features for both methods, computed from the same raw trial.
fn features_for(cfg: &ClassifyConfig, sub: &RingSubstrate, set: &TrialSet) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let pairs = set
        .trials
        .par_iter()
        .map(|t| Ok((trial_reservoir_features(cfg, sub, t)?, trial_fft_features(cfg, t)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Lowest SNR down to which the mean accuracy stays at or above `level`,
/// interpolated linearly into the first interval where it drops below.
pub fn threshold_crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pts.first()?.1 < level {
        return None;
    }
    for w in pts.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if lo.1 < level {
            return Some(lo.0 + (hi.0 - lo.0) * (level - lo.1) / (hi.1 - lo.1));
        }
    }
    pts.last().map(|p| p.0)
}

pub fn run_snr_sweep(cfg: &ClassifyConfig, master_seed: u64) -> Result<SnrSweep> {
    cfg.validate()?;
    let sub = RingSubstrate::new(cfg.n_nodes)?;
    let mut rows = Vec::with_capacity(cfg.snr_db.len());
    for (si, &snr) in cfg.snr_db.iter().enumerate() {
        let mut seeds = Vec::with_capacity(cfg.repetitions);
        let (mut res_acc, mut fft_acc) = (Vec::new(), Vec::new());
        for rep in 0..cfg.repetitions {
            let seed = derive_seed(master_seed, "classify", &[si as u64, rep as u64]);
            seeds.push(seed);
            let (train, test) = gen_trials(cfg, snr, cfg.n_train, cfg.n_test, seed);
            let (r_train, f_train) = features_for(cfg, &sub, &train)?;
            let (r_test, f_test) = features_for(cfg, &sub, &test)?;
            let (l_train, l_test) = (train.labels(), test.labels());
            res_acc.push(evaluate(&r_train, &l_train, &r_test, &l_test, cfg.lambda, cfg.standardize)?);
            fft_acc.push(evaluate(&f_train, &l_train, &f_test, &l_test, cfg.lambda, cfg.standardize)?);
        }
        let stats = |v: Vec<f64>| {
            let (mean, std) = mean_and_sample_std(&v);
            AccuracyStats {
                mean,
                std: if v.len() < 2 { 0.0 } else { std },
                per_rep: v,
            }
        };
        rows.push(SnrRow {
            snr_db: snr,
            seeds,
            reservoir: stats(res_acc),
            fft: stats(fft_acc),
        });
    }
    let curve = |m: FeatureMethod| rows.iter().map(|r| (r.snr_db, r.stats(m).mean)).collect::<Vec<_>>();
    Ok(SnrSweep {
        reservoir_crossing_db: threshold_crossing(&curve(FeatureMethod::Reservoir), 0.9),
        fft_crossing_db: threshold_crossing(&curve(FeatureMethod::Fft), 0.9),
        rows,
    })
}
