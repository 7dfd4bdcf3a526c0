use std::f64::consts::PI;

use serde::Serialize;

use super::ModeTrajectory;
use crate::error::{invalid, Error, Result};
use crate::integrate::Trajectory;

/// Right-anchored block of whole drive periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SteadyStateWindow {
    pub n_ss: usize,
    pub start_index: usize,
    pub length: usize,
}

/// `n_ss = floor((T/2) f)` periods ending at the last sample of a run of
/// `T/dt + 1` samples.
pub fn steady_window(t_tot: f64, f_drive: f64, dt: f64) -> Result<SteadyStateWindow> {
    if !(t_tot > 0.0 && f_drive > 0.0 && dt > 0.0) {
        return Err(invalid("steady_window", "T, f and dt must be positive"));
    }
    let periods = 0.5 * t_tot * f_drive;
    let n_ss = (periods + 1e-9).floor() as usize;
    if n_ss == 0 {
        return Err(Error::WindowTooShort);
    }
    let exact = n_ss as f64 / (f_drive * dt);
    let length = exact.round() as usize;
    if (exact - length as f64).abs() > 1e-6 {
        return Err(invalid(
            "output_dt",
            format!("{n_ss} drive periods span {exact} samples, not a whole number"),
        ));
    }
    let n_samples = (t_tot / dt).round() as usize + 1;
    Ok(SteadyStateWindow {
        n_ss,
        start_index: n_samples - length,
        length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicEnergies {
    /// `E_k` for `k = 1..=k_max` (index `k - 1`), as `sum_j |X_j[k n_ss]|^2`
    /// with the unnormalised DFT over the window.
    pub energies: Vec<f64>,
    pub window: SteadyStateWindow,
}

impl HarmonicEnergies {
    pub fn get(&self, k: usize) -> f64 {
        self.energies[k - 1]
    }
}

struct BinDft {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl BinDft {
    fn new(len: usize) -> Self {
        let (sin, cos) = (0..len).map(|m| (2.0 * PI * m as f64 / len as f64).sin_cos()).unzip();
        Self { cos, sin }
    }

    /// `|sum_m x[m] exp(-2 pi i bin m / L)|^2` with the twiddle index reduced exactly.
    fn power(&self, x: impl Iterator<Item = f64>, bin: usize) -> f64 {
        let len = self.cos.len();
        let (mut re, mut im) = (0.0, 0.0);
        let mut idx = 0usize;
        for v in x {
            re += v * self.cos[idx];
            im -= v * self.sin[idx];
            idx += bin;
            if idx >= len {
                idx -= len;
            }
        }
        re * re + im * im
    }
}

fn energies_from<F>(n_series: usize, window: SteadyStateWindow, k_max: usize, series: F) -> Result<HarmonicEnergies>
where
    F: Fn(usize) -> Vec<f64>,
{
    let nyquist = window.length / 2;
    let top = k_max * window.n_ss;
    if top > nyquist {
        return Err(Error::BinBeyondNyquist { bin: top, nyquist });
    }
    let dft = BinDft::new(window.length);
    let mut energies = vec![0.0; k_max];
    for c in 0..n_series {
        let x = series(c);
        for (k, e) in energies.iter_mut().enumerate() {
            *e += dft.power(x.iter().copied(), (k + 1) * window.n_ss);
        }
    }
    Ok(HarmonicEnergies { energies, window })
}

fn check_span(len: usize, window: &SteadyStateWindow) -> Result<()> {
    if window.start_index + window.length != len {
        return Err(Error::DimensionMismatch {
            expected: window.start_index + window.length,
            got: len,
        });
    }
    Ok(())
}

/// Node-summed harmonic energies of the first `n_nodes` state components.
pub fn harmonic_energies(traj: &Trajectory, n_nodes: usize, window: SteadyStateWindow, k_max: usize) -> Result<HarmonicEnergies> {
    check_span(traj.len(), &window)?;
    let dim = traj.dim();
    let states = traj.states();
    let start = window.start_index;
    energies_from(n_nodes, window, k_max, |c| {
        (start..start + window.length).map(|i| states[i * dim + c]).collect()
    })
}

/// Mode-summed harmonic energies; equal to the node sum by Parseval.
pub fn harmonic_energies_modes(mt: &ModeTrajectory, window: SteadyStateWindow, k_max: usize) -> Result<HarmonicEnergies> {
    check_span(mt.len(), &window)?;
    let start = window.start_index;
    energies_from(mt.n_modes(), window, k_max, |c| {
        (start..start + window.length).map(|i| mt.amplitudes(i)[c]).collect()
    })
}
