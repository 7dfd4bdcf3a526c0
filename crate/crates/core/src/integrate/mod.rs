//! Explicit Runge–Kutta integrators sampled onto a uniform output grid.
//!
//! * [`Method::Rk4`]: classical four-stage scheme at a fixed step.
//! * [`Method::Dp54`]: Dormand–Prince 5(4) with its quartic dense output.
//! * [`Method::Dop853`]: Hairer–Nørsett–Wanner 8(5,3) with its 7th-order dense output.
//!
//! Adaptive step control follows the usual embedded-pair recipe: the local
//! error is normalised per component by `atol + rtol * max(|y_old|, |y_new|)`
//! and aggregated as an RMS norm.

mod dop853;
mod dopri5;
mod rk4;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub(crate) use dop853::Dop853Stepper;
pub(crate) use dopri5::Dopri5Stepper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4")]
    Rk4,
    #[serde(rename = "rk45", alias = "dp54")]
    Dp54,
    #[serde(rename = "dop853")]
    Dop853,
}

impl Method {
    pub fn is_adaptive(self) -> bool {
        !matches!(self, Method::Rk4)
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Dp54 => "rk45",
            Method::Dop853 => "dop853",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    #[serde(default)]
    pub dt_fixed: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub output_dt: f64,
}

fn default_rtol() -> f64 {
    1e-6
}

fn default_atol() -> f64 {
    1e-8
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64, output_dt: f64) -> Self {
        Self {
            method: Method::Rk4,
            dt_fixed: Some(dt),
            rtol: default_rtol(),
            atol: default_atol(),
            t_start: 0.0,
            t_end,
            output_dt,
        }
    }

    pub fn adaptive(method: Method, rtol: f64, atol: f64, t_end: f64, output_dt: f64) -> Self {
        Self {
            method,
            dt_fixed: None,
            rtol,
            atol,
            t_start: 0.0,
            t_end,
            output_dt,
        }
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Number of output samples, endpoints included.
    pub fn n_outputs(&self) -> usize {
        (self.span() / self.output_dt).round() as usize + 1
    }

    pub fn output_time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.output_dt
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span() > 0.0) {
            return Err(invalid("integrator.t_end", "must exceed t_start"));
        }
        if !(self.output_dt > 0.0) {
            return Err(invalid("integrator.output_dt", "must be positive"));
        }
        let ratio = self.span() / self.output_dt;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return Err(invalid(
                "integrator.output_dt",
                "must divide the integration span into whole samples",
            ));
        }
        match self.method {
            Method::Rk4 => {
                let dt = self
                    .dt_fixed
                    .ok_or_else(|| invalid("integrator.dt_fixed", "required for rk4"))?;
                if !(dt > 0.0) {
                    return Err(invalid("integrator.dt_fixed", "must be positive"));
                }
                let per = self.output_dt / dt;
                if (per - per.round()).abs() > 1e-6 || per.round() < 1.0 {
                    return Err(invalid("integrator.output_dt", "must be an integer multiple of dt_fixed"));
                }
            }
            _ => {
                if !(self.rtol > 0.0 && self.atol > 0.0) {
                    return Err(invalid("integrator.rtol", "rtol and atol must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub dense_output: &'static str,
}

/// Uniformly sampled solution; states are stored row-major (`len x dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    dim: usize,
    states: Vec<f64>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, dim: usize, states: Vec<f64>) -> Self {
        assert_eq!(times.len() * dim, states.len());
        Self {
            times,
            dim,
            states,
            stats: IntegratorStats::default(),
        }
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

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    /// Time series of one state component.
    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.states[i * self.dim + c]).collect()
    }

    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates `dy/dt = f(t, y)` from `y0` and samples the solution on the output grid.
pub fn integrate<F>(f: F, y0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: cfg.t_start });
    }
    match cfg.method {
        Method::Rk4 => rk4::integrate(f, y0, cfg),
        Method::Dp54 => adaptive::<Dopri5Stepper, F>(f, y0, cfg),
        Method::Dop853 => adaptive::<Dop853Stepper, F>(f, y0, cfg),
    }
}

/// One embedded Runge–Kutta pair with dense output.
pub(crate) trait EmbeddedStepper {
    /// Order used in the step-size exponent `-1 / (order + 1)`.
    const ERROR_ORDER: f64;
    const DENSE: &'static str;

    fn new(dim: usize) -> Self;

    /// Attempts a step of size `h` from `(t, y)` where `f0 = f(t, y)`.
    /// Leaves the candidate in `y_new` and returns the scaled error norm.
    #[allow(clippy::too_many_arguments)]
    fn attempt<F>(
        &mut self,
        f: &mut F,
        t: f64,
        y: &[f64],
        f0: &[f64],
        h: f64,
        rtol: f64,
        atol: f64,
        y_new: &mut [f64],
    ) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>;

    /// Derivative at the accepted endpoint (first-same-as-last stage).
    fn endpoint_derivative(&self) -> &[f64];

    /// Prepares the interpolant for the last accepted step.
    fn prepare_dense<F>(&mut self, f: &mut F, t: f64, y: &[f64], y_new: &[f64], h: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>;

    /// Interpolated state at fraction `theta` of the last accepted step.
    fn dense(&self, theta: f64, out: &mut [f64]);

    fn evaluations(&self) -> usize;
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

fn rms_scaled(v: &[f64], y: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = v.len() as f64;
    (v.iter()
        .zip(y)
        .map(|(vi, yi)| {
            let s = atol + rtol * yi.abs();
            (vi / s) * (vi / s)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Starting step from the local scale of `f` and its first variation.
fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], order: f64, rtol: f64, atol: f64, span: f64) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let d0 = rms_scaled(y0, y0, rtol, atol);
    let d1 = rms_scaled(f0, y0, rtol, atol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, d)| y + h0 * d).collect();
    let mut f1 = vec![0.0; y0.len()];
    f(t0 + h0, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y0, rtol, atol) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / (order + 1.0))
    };
    Ok((100.0 * h0).min(h1).min(span))
}

fn adaptive<S, F>(mut f: F, y0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    S: EmbeddedStepper,
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let n_out = cfg.n_outputs();
    let span = cfg.span();
    let t_end = cfg.t_end;
    let h_floor = 1e-14 * span;

    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out * dim);
    times.push(cfg.t_start);
    states.extend_from_slice(y0);
    let mut next_out = 1usize;

    let mut stepper = S::new(dim);
    let mut t = cfg.t_start;
    let mut y = y0.to_vec();
    let mut f0 = vec![0.0; dim];
    f(t, &y, &mut f0)?;
    let mut h = initial_step(&mut f, t, &y, &f0, S::ERROR_ORDER, cfg.rtol, cfg.atol, span)?;
    let mut y_new = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    let mut stats = IntegratorStats {
        dense_output: S::DENSE,
        ..Default::default()
    };
    let exponent = -1.0 / (S::ERROR_ORDER + 1.0);

    while next_out < n_out {
        let mut rejected_once = false;
        let (h_taken, t_new) = loop {
            if h < h_floor {
                return Err(Error::StepUnderflow { t, h });
            }
            let mut t_new = t + h;
            if t_new >= t_end || t_end - t_new < h_floor {
                t_new = t_end;
            }
            let h_try = t_new - t;
            let err = stepper.attempt(&mut f, t, &y, &f0, h_try, cfg.rtol, cfg.atol, &mut y_new)?;
            if err.is_nan() {
                return Err(Error::NonFinite { t });
            }
            if err <= 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * err.powf(exponent))
                };
                if rejected_once {
                    factor = factor.min(1.0);
                }
                h = h_try * factor;
                break (h_try, t_new);
            }
            stats.rejected += 1;
            h = h_try * MIN_FACTOR.max(SAFETY * err.powf(exponent));
            rejected_once = true;
        };
        stats.steps += 1;
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_new });
        }

        let mut prepared = false;
        while next_out < n_out {
            let t_out = if next_out == n_out - 1 {
                t_end
            } else {
                cfg.output_time(next_out)
            };
            if t_out > t_new {
                break;
            }
            if t_out == t_new {
                states.extend_from_slice(&y_new);
            } else {
                if !prepared {
                    stepper.prepare_dense(&mut f, t, &y, &y_new, h_taken)?;
                    prepared = true;
                }
                stepper.dense((t_out - t) / h_taken, &mut buf);
                states.extend_from_slice(&buf);
            }
            times.push(cfg.output_time(next_out));
            next_out += 1;
        }

        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        f0.copy_from_slice(stepper.endpoint_derivative());
    }

    // the start derivative and the initial-step probe
    stats.evaluations = stepper.evaluations() + 2;
    let mut traj = Trajectory::new(times, dim, states);
    traj.stats = stats;
    Ok(traj)
}

#[cfg(test)]
mod tests;
