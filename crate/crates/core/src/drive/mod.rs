//! Drive waveforms injected at a single ring node, plus band-limited noise.

mod butterworth;
mod noise;
mod spline;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use butterworth::{Biquad, Butterworth};
pub use noise::{make_noise, noise_sigma, NoiseSpec, SampledNoise, SnrConvention, RNG_ALGORITHM};
pub use spline::UniformCubicSpline;

/// Closed-form drive waveform `s(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriveSpec {
    /// `cos(omega t + phase)`
    PureTone {
        omega: f64,
        phase: f64,
    },
    /// Linear chirp sweeping the instantaneous frequency from `omega_start`
    /// to `omega_end` over `duration`.
    Chirp {
        omega_start: f64,
        omega_end: f64,
        duration: f64,
    },
    /// Gaussian envelope centred on `t_center` times `cos(omega_carrier t)`.
    GaussianBurst {
        omega_carrier: f64,
        t_center: f64,
        sigma: f64,
    },
    /// `cos(omega_carrier t + (depth / omega_mod) sin(omega_mod t))`
    FmTone {
        omega_carrier: f64,
        omega_mod: f64,
        depth: f64,
    },
    /// `a1 cos(2 pi f t) + a2 cos(4 pi f t + delta_phi2)`
    TwoTone {
        a1: f64,
        a2: f64,
        f_drive: f64,
        delta_phi2: f64,
    },
    NoiseOnly,
}

impl DriveSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            DriveSpec::PureTone { omega, phase } => (omega * t + phase).cos(),
            DriveSpec::Chirp {
                omega_start,
                omega_end,
                duration,
            } => (omega_start * t + 0.5 * (omega_end - omega_start) * t * t / duration).cos(),
            DriveSpec::GaussianBurst {
                omega_carrier,
                t_center,
                sigma,
            } => {
                let d = t - t_center;
                (-d * d / (2.0 * sigma * sigma)).exp() * (omega_carrier * t).cos()
            }
            DriveSpec::FmTone {
                omega_carrier,
                omega_mod,
                depth,
            } => (omega_carrier * t + depth / omega_mod * (omega_mod * t).sin()).cos(),
            DriveSpec::TwoTone {
                a1,
                a2,
                f_drive,
                delta_phi2,
            } => a1 * (2.0 * PI * f_drive * t).cos() + a2 * (4.0 * PI * f_drive * t + delta_phi2).cos(),
            DriveSpec::NoiseOnly => 0.0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        use crate::error::invalid;
        let finite = |v: f64| v.is_finite();
        match *self {
            DriveSpec::PureTone { omega, phase } if !(finite(omega) && finite(phase)) => {
                Err(invalid("drive", "non-finite tone parameters"))
            }
            DriveSpec::Chirp { duration, .. } if !(duration > 0.0) => Err(invalid("drive.duration", "must be positive")),
            DriveSpec::GaussianBurst { sigma, .. } if !(sigma > 0.0) => {
                Err(invalid("drive.sigma", "envelope width must be positive"))
            }
            DriveSpec::FmTone { omega_mod, .. } if omega_mod == 0.0 || !omega_mod.is_finite() => {
                Err(invalid("drive.omega_mod", "must be non-zero"))
            }
            DriveSpec::TwoTone { a1, a2, f_drive, .. } => {
                if !(f_drive > 0.0) {
                    Err(invalid("drive.f_drive", "must be positive"))
                } else if !(finite(a1) && finite(a2)) {
                    Err(invalid("drive", "amplitudes must be finite"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Same two-tone drive with a different second-harmonic phase.
    pub fn with_delta_phi2(&self, phase: f64) -> Self {
        match *self {
            DriveSpec::TwoTone { a1, a2, f_drive, .. } => DriveSpec::TwoTone {
                a1,
                a2,
                f_drive,
                delta_phi2: phase,
            },
            other => other,
        }
    }
}

/// `sqrt(a1^2 + a2^2) / 2`, the signal scale the power-SNR convention is
/// referenced to. The true RMS of the two-tone is `sqrt((a1^2 + a2^2) / 2)`;
/// see [`two_tone_rms`].
pub fn two_tone_signal_scale(a1: f64, a2: f64) -> f64 {
    (a1 * a1 + a2 * a2).sqrt() / 2.0
}

pub fn two_tone_rms(a1: f64, a2: f64) -> f64 {
    ((a1 * a1 + a2 * a2) / 2.0).sqrt()
}

/// A uniformly sampled input held constant across each sample interval.
#[derive(Debug, Clone)]
pub struct HeldSignal {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl HeldSignal {
    pub fn eval(&self, t: f64) -> f64 {
        // tolerance so a stage landing on t_k + dt in floating point still maps to k + 1
        let idx = (t / self.dt + 1e-9).floor().max(0.0) as usize;
        self.samples[idx.min(self.samples.len() - 1)]
    }
}
