use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::Serialize;

use crate::error::{invalid, Result};

/// `w[i] = 0.5 - 0.5 cos(2 pi i / n)`, the DFT-even Hann window.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Short-time magnitude spectrum, `mags[segment][bin]` over the one-sided bins.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrogram {
    /// Segment centres.
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub mags: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Magnitude averaged over all segments.
    pub fn mean_magnitude(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.freqs.len()];
        for row in &self.mags {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.mags.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Piecewise-linear interpolation of the mean magnitude at `f`.
    pub fn interpolate(mean: &[f64], df: f64, f: f64) -> f64 {
        let u = (f / df).max(0.0);
        let i = (u.floor() as usize).min(mean.len() - 2);
        let w = (u - i as f64).min(1.0);
        (1.0 - w) * mean[i] + w * mean[i + 1]
    }
}

/// Hann-windowed segments of `window_s` seconds advanced by `hop_s`.
pub fn spectrogram(signal: &[f64], dt: f64, window_s: f64, hop_s: f64) -> Result<Spectrogram> {
    let nperseg = (window_s / dt).round() as usize;
    let hop = (hop_s / dt).round() as usize;
    if nperseg < 2 || hop == 0 {
        return Err(invalid("spectrogram", "window and hop must span at least one sample"));
    }
    if signal.len() < nperseg {
        return Err(invalid("spectrogram", "signal shorter than one window"));
    }
    let window = hann_periodic(nperseg);
    let fft = FftPlanner::new().plan_fft_forward(nperseg);
    let n_bins = nperseg / 2 + 1;
    let mut buf = vec![Complex64::default(); nperseg];
    let mut times = Vec::new();
    let mut mags = Vec::new();
    let mut start = 0;
    while start + nperseg <= signal.len() {
        for ((b, x), w) in buf.iter_mut().zip(&signal[start..start + nperseg]).zip(&window) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        mags.push(buf[..n_bins].iter().map(|c| c.norm()).collect());
        times.push((start as f64 + nperseg as f64 / 2.0) * dt);
        start += hop;
    }
    let df = 1.0 / (nperseg as f64 * dt);
    Ok(Spectrogram {
        times,
        freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
        mags,
    })
}

/// Time-averaged magnitude spectrum sampled at `freqs` (Hz), with segments
/// overlapping by the fraction `overlap`.
pub fn fft_baseline_features(signal: &[f64], dt: f64, freqs: &[f64], window_s: f64, overlap: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&overlap) {
        return Err(invalid("overlap", "must lie in [0, 1)"));
    }
    let nperseg = (window_s / dt).round() as usize;
    let hop_samples = ((1.0 - overlap) * nperseg as f64).round().max(1.0);
    let spec = spectrogram(signal, dt, window_s, hop_samples * dt)?;
    let mean = spec.mean_magnitude();
    let df = spec.freqs[1];
    Ok(freqs.iter().map(|&f| Spectrogram::interpolate(&mean, df, f)).collect())
}
