//! Post-integration analysis: eigenmode projection, envelopes, steady-state
//! harmonic energies and the short-time spectral baseline.

mod envelope;
mod harmonics;
mod spectrogram;

use serde::Serialize;

pub use envelope::{hilbert_envelope, reservoir_features, wavenumber_envelopes, HilbertTransformer};
pub use harmonics::{harmonic_energies, harmonic_energies_modes, steady_window, HarmonicEnergies, SteadyStateWindow};
pub use spectrogram::{fft_baseline_features, hann_periodic, spectrogram, Spectrogram};

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::substrate::RingSubstrate;

/// Real-basis mode amplitudes `a = V^T x`, stored row-major (`len x N`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTrajectory {
    times: Vec<f64>,
    n_modes: usize,
    amplitudes: Vec<f64>,
}

impl ModeTrajectory {
    /// Wraps a trajectory integrated directly in mode coordinates, keeping
    /// the first `n_modes` components (the amplitudes) of every state.
    pub fn from_mode_states(traj: &Trajectory, n_modes: usize) -> Result<Self> {
        if traj.dim() < n_modes {
            return Err(Error::DimensionMismatch {
                expected: n_modes,
                got: traj.dim(),
            });
        }
        let mut amplitudes = Vec::with_capacity(traj.len() * n_modes);
        for i in 0..traj.len() {
            amplitudes.extend_from_slice(&traj.state(i)[..n_modes]);
        }
        Ok(Self {
            times: traj.times().to_vec(),
            n_modes,
            amplitudes,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn amplitudes(&self, i: usize) -> &[f64] {
        &self.amplitudes[i * self.n_modes..(i + 1) * self.n_modes]
    }

    /// Time series of one basis column.
    pub fn series(&self, col: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.amplitudes[i * self.n_modes + col]).collect()
    }
}

/// Projects node positions onto the eigenbasis. Accepts position-only (`N`)
/// or position-velocity (`2N`) states; velocities are ignored.
pub fn project_modes(sub: &RingSubstrate, traj: &Trajectory) -> Result<ModeTrajectory> {
    let n = sub.n_nodes();
    if traj.dim() != n && traj.dim() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: traj.dim(),
        });
    }
    let mut amplitudes = vec![0.0; traj.len() * n];
    for (i, row) in amplitudes.chunks_exact_mut(n).enumerate() {
        sub.project_into(&traj.state(i)[..n], row);
    }
    Ok(ModeTrajectory {
        times: traj.times().to_vec(),
        n_modes: n,
        amplitudes,
    })
}
