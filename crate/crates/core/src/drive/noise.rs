//! Band-limited Gaussian noise on a storage grid, queried off-grid through a
//! cubic spline.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Butterworth, UniformCubicSpline};
use crate::error::{invalid, Result};

/// Generator used for every stochastic draw in the crate.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9) + StandardNormal ziggurat (rand_distr 0.5)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// `sigma = 10^(-SNR/20)`, signal amplitude fixed at one.
    Amplitude,
    /// `sigma = sigma_s / sqrt(10^(SNR/10))`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub convention: SnrConvention,
    pub cutoff: f64,
    pub filter_order: usize,
    pub seed: u64,
    pub grid_dt: f64,
    pub total_time: f64,
}

impl NoiseSpec {
    pub fn n_grid(&self) -> usize {
        (self.total_time / self.grid_dt).round() as usize + 1
    }

    /// Samples prepended and discarded so the IIR start-up transient never reaches the grid.
    pub fn warmup_samples(&self) -> usize {
        (10.0 / self.cutoff / self.grid_dt).ceil() as usize
    }
}

/// Target standard deviation of the noise for the given clean-signal scale.
pub fn noise_sigma(spec: &NoiseSpec, signal_scale: f64) -> f64 {
    match spec.convention {
        SnrConvention::Amplitude => 10f64.powf(-spec.snr_db / 20.0),
        SnrConvention::Power => signal_scale / 10f64.powf(spec.snr_db / 10.0).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledNoise {
    grid_dt: f64,
    sigma: f64,
    spline: UniformCubicSpline,
}

impl SampledNoise {
    pub fn values(&self) -> &[f64] {
        self.spline.knots()
    }

    pub fn grid_dt(&self) -> f64 {
        self.grid_dt
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn total_time(&self) -> f64 {
        self.spline.end()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.spline.eval(t)
    }
}

pub(crate) fn population_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

/// White Gaussian samples through a causal Butterworth low-pass, rescaled to
/// the target standard deviation and splined over the grid.
pub fn make_noise(spec: &NoiseSpec, signal_scale: f64) -> Result<SampledNoise> {
    if !(spec.grid_dt > 0.0 && spec.total_time > 0.0) {
        return Err(invalid("noise", "grid_dt and total_time must be positive"));
    }
    let fs = 1.0 / spec.grid_dt;
    if spec.cutoff >= fs / 2.0 {
        return Err(invalid(
            "noise.cutoff",
            format!("cutoff {} is not below the grid Nyquist {}", spec.cutoff, fs / 2.0),
        ));
    }
    let filter = Butterworth::lowpass(spec.filter_order, spec.cutoff, fs)?;
    let warm = spec.warmup_samples();
    let n = spec.n_grid();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let white: Vec<f64> = (0..warm + n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let filtered = filter.filter(&white);
    let mut grid = filtered[warm..].to_vec();

    let sigma = noise_sigma(spec, signal_scale);
    let std = population_std(&grid);
    if !(std > 0.0) {
        return Err(invalid("noise", "filtered series has zero variance"));
    }
    let scale = sigma / std;
    grid.iter_mut().for_each(|v| *v *= scale);

    Ok(SampledNoise {
        grid_dt: spec.grid_dt,
        sigma,
        spline: UniformCubicSpline::new(0.0, spec.grid_dt, grid)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex64, FftPlanner};

    fn spec(snr_db: f64, convention: SnrConvention, seed: u64) -> NoiseSpec {
        NoiseSpec {
            snr_db,
            convention,
            cutoff: 5.0,
            filter_order: 4,
            seed,
            grid_dt: 0.05,
            total_time: 200.0,
        }
    }

    #[test]
    fn sigma_conventions() {
        let s = 0.45f64.sqrt() / 2.0;
        assert!((noise_sigma(&spec(0.0, SnrConvention::Power, 0), s) - s).abs() < 1e-15);
        assert!((noise_sigma(&spec(20.0, SnrConvention::Power, 0), s) - s / 10.0).abs() < 1e-15);
        assert_eq!(noise_sigma(&spec(0.0, SnrConvention::Amplitude, 0), s), 1.0);
    }

    #[test]
    fn rescaled_std_is_exact() {
        let sp = spec(10.0, SnrConvention::Power, 42);
        let n = make_noise(&sp, 0.3354).unwrap();
        let target = noise_sigma(&sp, 0.3354);
        assert!((population_std(n.values()) - target).abs() / target < 1e-12);
        assert_eq!(n.values().len(), 4001);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = make_noise(&spec(10.0, SnrConvention::Power, 7), 1.0).unwrap();
        let b = make_noise(&spec(10.0, SnrConvention::Power, 7), 1.0).unwrap();
        let c = make_noise(&spec(10.0, SnrConvention::Power, 8), 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn rejects_cutoff_above_nyquist() {
        let mut sp = spec(10.0, SnrConvention::Power, 1);
        sp.cutoff = 10.0;
        assert!(make_noise(&sp, 1.0).is_err());
    }

    #[test]
    fn eval_outside_grid_is_rejected() {
        let n = make_noise(&spec(10.0, SnrConvention::Power, 1), 1.0).unwrap();
        assert!(n.eval(200.0).is_ok());
        assert!(n.eval(200.1).is_err());
        assert!(n.eval(-0.01).is_err());
        assert_eq!(n.eval(0.05 * 17.0).unwrap(), n.values()[17]);
    }

    #[test]
    fn stopband_suppressed_by_twenty_db() {
        // periodogram of a long realisation, cutoff 2 so that 2 f_c sits inside the band
        let sp = NoiseSpec {
            cutoff: 2.0,
            total_time: 2000.0,
            ..spec(0.0, SnrConvention::Amplitude, 3)
        };
        let n = make_noise(&sp, 1.0).unwrap();
        let v = n.values();
        let len = v.len();
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let df = 1.0 / (len as f64 * sp.grid_dt);
        let mut pass = (0.0, 0usize);
        let mut stop = (0.0, 0usize);
        for (k, c) in buf.iter().enumerate().take(len / 2) {
            let f = k as f64 * df;
            if f > 0.0 && f < sp.cutoff * 0.8 {
                pass.0 += c.norm_sqr();
                pass.1 += 1;
            } else if f > 2.0 * sp.cutoff {
                stop.0 += c.norm_sqr();
                stop.1 += 1;
            }
        }
        let ratio_db = 10.0 * ((stop.0 / stop.1 as f64) / (pass.0 / pass.1 as f64)).log10();
        assert!(ratio_db < -20.0, "stopband at {ratio_db} dB");
    }
}
