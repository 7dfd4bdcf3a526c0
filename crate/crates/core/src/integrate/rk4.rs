use super::{IntegratorConfig, IntegratorStats, Trajectory};
use crate::error::{Error, Result};

pub(super) fn integrate<F>(mut f: F, y0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = y0.len();
    let dt = cfg.dt_fixed.expect("validated");
    let per_out = (cfg.output_dt / dt).round() as usize;
    let n_out = cfg.n_outputs();
    let n_steps = (n_out - 1) * per_out;

    let mut times = Vec::with_capacity(n_out);
    let mut states = Vec::with_capacity(n_out * dim);
    times.push(cfg.t_start);
    states.extend_from_slice(y0);

    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    for step in 0..n_steps {
        let t = cfg.t_start + step as f64 * dt;
        rk4_step(&mut f, t, dt, &mut y, [&mut k1, &mut k2, &mut k3, &mut k4], &mut tmp)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t + dt });
        }
        if (step + 1) % per_out == 0 {
            times.push(cfg.output_time((step + 1) / per_out));
            states.extend_from_slice(&y);
        }
    }

    let mut traj = Trajectory::new(times, dim, states);
    traj.stats = IntegratorStats {
        steps: n_steps,
        rejected: 0,
        evaluations: 4 * n_steps,
        dense_output: "none (output on step grid)",
    };
    Ok(traj)
}

/// Advances `y` in place by one classical RK4 step.
pub(crate) fn rk4_step<F>(f: &mut F, t: f64, h: f64, y: &mut [f64], k: [&mut Vec<f64>; 4], tmp: &mut [f64]) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let [k1, k2, k3, k4] = k;
    f(t, y, k1)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, tmp, k2)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, tmp, k3)?;
    for i in 0..y.len() {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, tmp, k4)?;
    for i in 0..y.len() {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(())
}
