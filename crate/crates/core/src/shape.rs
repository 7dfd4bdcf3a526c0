//! The shape observable: sweep the second-harmonic phase of a two-tone drive,
//! reconstruct `E_k(phi)` as a trigonometric polynomial and locate its peak.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drive::{make_noise, two_tone_signal_scale, DriveSpec, NoiseSpec, SampledNoise, SnrConvention};
use crate::dynamics::{simulate, RegimeParams};
use crate::error::{Error, Result};
use crate::integrate::{IntegratorConfig, Method, Trajectory};
use crate::readout::{harmonic_energies, steady_window, HarmonicEnergies, SteadyStateWindow};
use crate::seeds::derive_seed;
use crate::substrate::RingSubstrate;

pub const FINE_GRID: usize = 2048;
/// Highest harmonic whose energy is recorded.
pub const K_MAX: usize = 6;

/// Everything needed to turn a phase `delta_phi2` into steady-state harmonic energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeProtocol {
    pub n_nodes: usize,
    pub params: RegimeParams,
    pub a1: f64,
    pub a2: f64,
    pub f_drive: f64,
    #[serde(default)]
    pub drive_node: usize,
    pub integrator: IntegratorConfig,
    #[serde(default = "default_harmonic")]
    pub harmonic: usize,
    #[serde(default = "default_cutoff")]
    pub noise_cutoff: f64,
    #[serde(default = "default_filter_order")]
    pub noise_filter_order: usize,
}

fn default_harmonic() -> usize {
    5
}

fn default_cutoff() -> f64 {
    5.0
}

fn default_filter_order() -> usize {
    4
}

impl ShapeProtocol {
    /// Duffing working point with the standard two-tone amplitudes and the
    /// given integration settings at output step 0.05.
    pub fn duffing(method: Method, rtol: f64, atol: f64, t_tot: f64) -> Self {
        Self {
            n_nodes: 64,
            params: RegimeParams::DUFFING,
            a1: 0.6,
            a2: 0.30,
            f_drive: 0.18,
            drive_node: 0,
            integrator: IntegratorConfig::adaptive(method, rtol, atol, t_tot, 0.05),
            harmonic: 5,
            noise_cutoff: 5.0,
            noise_filter_order: 4,
        }
    }

    pub fn drive(&self, delta_phi2: f64) -> DriveSpec {
        DriveSpec::TwoTone {
            a1: self.a1,
            a2: self.a2,
            f_drive: self.f_drive,
            delta_phi2,
        }
    }

    pub fn window(&self) -> Result<SteadyStateWindow> {
        steady_window(self.integrator.span(), self.f_drive, self.integrator.output_dt)
    }

    pub fn signal_scale(&self) -> f64 {
        two_tone_signal_scale(self.a1, self.a2)
    }

    /// Storage-grid noise matching this protocol's horizon.
    pub fn noise_spec(&self, snr_db: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            snr_db,
            convention: SnrConvention::Power,
            cutoff: self.noise_cutoff,
            filter_order: self.noise_filter_order,
            seed,
            grid_dt: self.integrator.output_dt,
            total_time: self.integrator.t_end,
        }
    }

    pub fn simulate(&self, sub: &RingSubstrate, delta_phi2: f64, noise: Option<&SampledNoise>) -> Result<Trajectory> {
        let drive = self.drive(delta_phi2);
        drive.validate()?;
        match noise {
            None => simulate(sub, self.params, self.drive_node, |t| Ok(drive.eval(t)), &self.integrator),
            Some(nz) => simulate(
                sub,
                self.params,
                self.drive_node,
                |t| Ok(drive.eval(t) + nz.eval(t)?),
                &self.integrator,
            ),
        }
    }

    pub fn energies(&self, sub: &RingSubstrate, delta_phi2: f64, noise: Option<&SampledNoise>) -> Result<HarmonicEnergies> {
        let window = self.window()?;
        let traj = self.simulate(sub, delta_phi2, noise)?;
        harmonic_energies(&traj, sub.n_nodes(), window, K_MAX)
    }
}

/// `2 pi m / n_phi` for `m = 0..n_phi`.
pub fn phase_grid(n_phi: usize) -> Vec<f64> {
    (0..n_phi).map(|m| 2.0 * PI * m as f64 / n_phi as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSweep {
    pub harmonic: usize,
    pub delta_phi2: Vec<f64>,
    pub energies: Vec<HarmonicEnergies>,
}

impl ShapeSweep {
    /// `E_harmonic` at every grid point.
    pub fn samples(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e.get(self.harmonic)).collect()
    }
}

/// One simulation per phase on the uniform grid, optionally with a shared
/// noise realisation added to every drive.
pub fn sweep_shape(protocol: &ShapeProtocol, n_phi: usize, noise: Option<&SampledNoise>) -> Result<ShapeSweep> {
    let sub = RingSubstrate::new(protocol.n_nodes)?;
    protocol.params.validate()?;
    let grid = phase_grid(n_phi);
    let energies = grid
        .par_iter()
        .map(|&phi| {
            protocol.energies(&sub, phi, noise).map_err(|e| Error::Sweep {
                delta_phi2: phi,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeSweep {
        harmonic: protocol.harmonic,
        delta_phi2: grid,
        energies,
    })
}

/// Maps an angle into `[0, pi)`.
pub fn fold_pi(phi: f64) -> f64 {
    let r = phi.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiEstimate {
    /// Folded peak position; `None` when the curve is flat.
    pub phi0: Option<f64>,
    pub raw_argmax: Option<f64>,
    pub flat: bool,
    /// `a_n = 2 Re E_n`, `b_n = -2 Im E_n` for `n = 0..=n_phi/2` (the `n = 0`
    /// and Nyquist entries hold the raw coefficient, not doubled).
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub sym2_residual: f64,
    pub sym1_ratio: f64,
    /// `log10` of the dominant even-`n` magnitude over the dominant odd-`n` magnitude, `n >= 1`.
    pub odd_even_decades: f64,
}

struct Coefficients {
    re: Vec<f64>,
    im: Vec<f64>,
}

fn dft_half(samples: &[f64]) -> Coefficients {
    let n = samples.len();
    let mut re = vec![0.0; n / 2 + 1];
    let mut im = vec![0.0; n / 2 + 1];
    for k in 0..=n / 2 {
        for (m, &e) in samples.iter().enumerate() {
            let arg = 2.0 * PI * ((k * m) % n) as f64 / n as f64;
            re[k] += e * arg.cos();
            im[k] -= e * arg.sin();
        }
        re[k] /= n as f64;
        im[k] /= n as f64;
    }
    Coefficients { re, im }
}

/// Band-limited reconstruction at `phi` from the one-sided coefficients.
fn reconstruct_at(c: &Coefficients, n_phi: usize, phi: f64) -> f64 {
    let half = n_phi / 2;
    let mut v = c.re[0];
    for k in 1..half {
        let (s, co) = (k as f64 * phi).sin_cos();
        v += 2.0 * (c.re[k] * co - c.im[k] * s);
    }
    v + c.re[half] * (half as f64 * phi).cos()
}

/// Trigonometric interpolant of an evenly sampled period, evaluated anywhere.
pub fn trig_interpolate(samples: &[f64], phi: f64) -> f64 {
    reconstruct_at(&dft_half(samples), samples.len(), phi)
}

/// Peak of the trigonometric interpolant on a uniform fine grid over `[0, 2 pi)`,
/// folded into `[0, pi)`, with symmetry diagnostics.
pub fn reconstruct_and_peak(samples: &[f64], fine: usize) -> Result<PhiEstimate> {
    let n = samples.len();
    if n < 4 || n % 2 == 1 {
        return Err(crate::error::invalid("n_phi", "need an even number of at least four samples"));
    }
    let c = dft_half(samples);
    let half = n / 2;

    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut lo = f64::INFINITY;
    for i in 0..fine {
        let v = reconstruct_at(&c, n, 2.0 * PI * i as f64 / fine as f64);
        if v > best.0 {
            best = (v, i);
        }
        lo = lo.min(v);
    }
    let mean = c.re[0];
    let flat = best.0 - lo < 1e-12 * mean.abs() || best.0 == lo;
    let raw = 2.0 * PI * best.1 as f64 / fine as f64;

    let a: Vec<f64> = (0..=half)
        .map(|k| if k == 0 || k == half { c.re[k] } else { 2.0 * c.re[k] })
        .collect();
    let b: Vec<f64> = (0..=half)
        .map(|k| if k == 0 || k == half { -c.im[k] } else { -2.0 * c.im[k] })
        .collect();

    let sym2_residual = (0..half)
        .map(|m| (samples[m + half] - samples[m]).abs() / samples[m].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let sym1_ratio = if a.len() > 2 { b[2].abs() / a[2].abs() } else { f64::NAN };
    let (mut even, mut odd) = (0.0f64, 0.0f64);
    for k in 1..=half {
        let mag = a[k].hypot(b[k]);
        if k % 2 == 0 {
            even = even.max(mag);
        } else {
            odd = odd.max(mag);
        }
    }
    let odd_even_decades = (even / odd).log10();

    Ok(PhiEstimate {
        phi0: (!flat).then(|| fold_pi(raw)),
        raw_argmax: (!flat).then_some(raw),
        flat,
        a,
        b,
        sym2_residual,
        sym1_ratio,
        odd_even_decades,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub sweep: ShapeSweep,
    pub estimate: PhiEstimate,
}

/// Noise-free sweep and peak extraction for each cubic coefficient.
pub fn alpha_trajectory(protocol: &ShapeProtocol, alphas: &[f64], n_phi: usize) -> Result<Vec<AlphaPoint>> {
    alphas
        .iter()
        .map(|&alpha| {
            let mut p = protocol.clone();
            p.params = p.params.with_alpha(alpha);
            let sweep = sweep_shape(&p, n_phi, None)?;
            let estimate = reconstruct_and_peak(&sweep.samples(), FINE_GRID)?;
            Ok(AlphaPoint { alpha, sweep, estimate })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseCell {
    pub snr_db: f64,
    pub seed_index: usize,
    pub seed: u64,
    pub phi0: Option<f64>,
    pub samples: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseAggregate {
    pub snr_db: f64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRobustness {
    pub cells: Vec<NoiseCell>,
    pub aggregates: Vec<NoiseAggregate>,
    /// SNR at which `mean - 2 std` crosses `pi / 2`, linearly interpolated.
    pub threshold_db: Option<f64>,
}

pub fn mean_and_sample_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Lowest SNR above which `mean - 2 std > pi/2` holds at every grid point,
/// interpolated linearly across the first failing interval.
pub fn two_sigma_threshold(aggregates: &[NoiseAggregate]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = aggregates
        .iter()
        .filter(|a| a.n_ok >= 2)
        .map(|a| (a.snr_db, a.mean - 2.0 * a.std - PI / 2.0))
        .collect();
    pts.sort_by(|x, y| y.0.total_cmp(&x.0));
    let first = pts.first()?;
    if first.1 <= 0.0 {
        return None;
    }
    for w in pts.windows(2) {
        let (hi, lo) = (w[0], w[1]);
        if lo.1 <= 0.0 {
            return Some(lo.0 + (hi.0 - lo.0) * (0.0 - lo.1) / (hi.1 - lo.1));
        }
    }
    // never crosses inside the grid
    pts.last().map(|p| p.0)
}

/// Per `(snr, seed)` cell: one noise realisation shared by an `n_phi`-point sweep.
pub fn noise_robustness(
    protocol: &ShapeProtocol,
    snrs: &[f64],
    n_seeds: usize,
    n_phi: usize,
    master_seed: u64,
) -> Result<NoiseRobustness> {
    let sub = RingSubstrate::new(protocol.n_nodes)?;
    protocol.params.validate()?;
    let window = protocol.window()?;
    let grid = phase_grid(n_phi);
    let scale = protocol.signal_scale();

    let tasks: Vec<(usize, usize, usize)> = (0..snrs.len())
        .flat_map(|i| (0..n_seeds).flat_map(move |s| (0..n_phi).map(move |m| (i, s, m))))
        .collect();
    let seeds: Vec<Vec<u64>> = (0..snrs.len())
        .map(|i| {
            (0..n_seeds)
                .map(|s| derive_seed(master_seed, "noise-robustness", &[i as u64, s as u64]))
                .collect()
        })
        .collect();
    let noises: Vec<Vec<Result<SampledNoise>>> = (0..snrs.len())
        .map(|i| {
            (0..n_seeds)
                .map(|s| make_noise(&protocol.noise_spec(snrs[i], seeds[i][s]), scale))
                .collect()
        })
        .collect();

    let results: Vec<Result<f64>> = tasks
        .par_iter()
        .map(|&(i, s, m)| {
            let noise = noises[i][s]
                .as_ref()
                .map_err(|e| crate::error::invalid("noise", e.to_string()))?;
            let traj = protocol.simulate(&sub, grid[m], Some(noise))?;
            Ok(harmonic_energies(&traj, sub.n_nodes(), window, K_MAX)?.get(protocol.harmonic))
        })
        .collect();

    let mut cells = Vec::with_capacity(snrs.len() * n_seeds);
    for (i, &snr) in snrs.iter().enumerate() {
        for s in 0..n_seeds {
            let base = (i * n_seeds + s) * n_phi;
            let mut samples = Vec::with_capacity(n_phi);
            let mut error = None;
            for (m, r) in results[base..base + n_phi].iter().enumerate() {
                match r {
                    Ok(v) => samples.push(*v),
                    Err(e) => {
                        error.get_or_insert_with(|| format!("delta_phi2 = {}: {e}", grid[m]));
                    }
                }
            }
            let phi0 = if error.is_none() {
                match reconstruct_and_peak(&samples, FINE_GRID) {
                    Ok(est) => est.phi0,
                    Err(e) => {
                        error = Some(e.to_string());
                        None
                    }
                }
            } else {
                None
            };
            if phi0.is_none() && error.is_none() {
                error = Some("flat E_k curve".into());
            }
            cells.push(NoiseCell {
                snr_db: snr,
                seed_index: s,
                seed: seeds[i][s],
                phi0,
                samples,
                error,
            });
        }
    }

    let aggregates: Vec<NoiseAggregate> = snrs
        .iter()
        .map(|&snr| {
            let ok: Vec<f64> = cells.iter().filter(|c| c.snr_db == snr).filter_map(|c| c.phi0).collect();
            let total = cells.iter().filter(|c| c.snr_db == snr).count();
            let (mean, std) = mean_and_sample_std(&ok);
            NoiseAggregate {
                snr_db: snr,
                mean,
                std,
                n_ok: ok.len(),
                n_failed: total - ok.len(),
            }
        })
        .collect();
    let threshold_db = two_sigma_threshold(&aggregates);
    Ok(NoiseRobustness {
        cells,
        aggregates,
        threshold_db,
    })
}
