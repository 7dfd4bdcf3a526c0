use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};

use super::ModeTrajectory;
use crate::substrate::{Parity, RingSubstrate};

/// Analytic-signal envelope by the FFT method, with plans cached for one length.
pub struct HilbertTransformer {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl HilbertTransformer {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            len,
            forward,
            inverse,
            buf: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn envelope_into(&mut self, series: &[f64], out: &mut [f64]) {
        assert_eq!(series.len(), self.len);
        let n = self.len;
        for (b, &x) in self.buf.iter_mut().zip(series) {
            *b = Complex64::new(x, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        // one-sided spectrum: keep DC (and Nyquist for even n), double the positive half
        let pos_end = n.div_ceil(2);
        for b in &mut self.buf[1..pos_end] {
            *b *= 2.0;
        }
        for b in &mut self.buf[n / 2 + 1..] {
            *b = Complex64::default();
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / n as f64;
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.norm() * scale;
        }
    }

    pub fn envelope(&mut self, series: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; series.len()];
        self.envelope_into(series, &mut out);
        out
    }
}

/// `|x + i H{x}|`.
pub fn hilbert_envelope(series: &[f64]) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    HilbertTransformer::new(series.len()).envelope(series)
}

/// Per-sample envelope for wavenumbers `1..=N/2`. Cosine and sine partners
/// are combined as `sqrt(env_c^2 + env_s^2)`.
pub fn wavenumber_envelopes(sub: &RingSubstrate, mt: &ModeTrajectory) -> Vec<Vec<f64>> {
    let len = mt.len();
    let mut hilbert = HilbertTransformer::new(len);
    let mut env_s = vec![0.0; len];
    (1..=sub.n_nodes() / 2)
        .map(|k| {
            let mut env = vec![0.0; len];
            match (sub.column_of(k, Parity::Cosine), sub.column_of(k, Parity::Sine)) {
                (Some(c), Some(s)) => {
                    hilbert.envelope_into(&mt.series(c), &mut env);
                    hilbert.envelope_into(&mt.series(s), &mut env_s);
                    env.iter_mut().zip(&env_s).for_each(|(e, s)| *e = e.hypot(*s));
                }
                _ => {
                    let col = sub.column_of(k, Parity::Nyquist).expect("wavenumber N/2");
                    hilbert.envelope_into(&mt.series(col), &mut env);
                }
            }
            env
        })
        .collect()
}

/// Mean of [`wavenumber_envelopes`] over `t > t_half`.
pub fn reservoir_features(sub: &RingSubstrate, mt: &ModeTrajectory, t_half: f64) -> Vec<f64> {
    let len = mt.len();
    let start = mt.times().iter().position(|&t| t > t_half).unwrap_or(len);
    let count = (len - start).max(1) as f64;
    wavenumber_envelopes(sub, mt)
        .into_iter()
        .map(|env| env[start..].iter().sum::<f64>() / count)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_has_unit_envelope_in_the_interior() {
        let dt = 0.01;
        let f = 1.25;
        let n = 1600; // 20 whole cycles
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 * dt).cos()).collect();
        let env = hilbert_envelope(&x);
        let cycle = (1.0 / (f * dt)) as usize;
        for e in &env[cycle..n - cycle] {
            assert!((e - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn decaying_cosine_envelope() {
        // 3 s of decay; the wrap-around jump spoils the tail, so only the interior is checked
        let dt = 0.005;
        let n = 600;
        let w = 2.0 * PI * 6.0;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                (-t).exp() * (w * t).cos()
            })
            .collect();
        let env = hilbert_envelope(&x);
        for i in n / 10..n * 6 / 10 {
            let expect = (-(i as f64) * dt).exp();
            assert!((env[i] - expect).abs() / expect < 0.02, "i={i}");
        }
    }

    #[test]
    fn constant_and_dominance() {
        let env = hilbert_envelope(&[-2.5; 64]);
        assert!(env.iter().all(|e| (e - 2.5).abs() < 1e-12));
        let x: Vec<f64> = (0..300).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let env = hilbert_envelope(&x);
        for (e, v) in env.iter().zip(&x) {
            assert!(*e >= v.abs() - 1e-12);
        }
    }
}
