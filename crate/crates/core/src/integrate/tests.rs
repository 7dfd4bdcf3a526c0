use super::*;

const GAMMA: f64 = 0.5;
const OMEGA: f64 = 2.0 * std::f64::consts::PI;

fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    dy[0] = y[1];
    dy[1] = -GAMMA * y[1] - OMEGA * OMEGA * y[0];
    Ok(())
}

fn exact(t: f64) -> [f64; 2] {
    let wd = (OMEGA * OMEGA - GAMMA * GAMMA / 4.0).sqrt();
    let e = (-GAMMA * t / 2.0).exp();
    [
        e * ((wd * t).cos() + GAMMA / (2.0 * wd) * (wd * t).sin()),
        -e * OMEGA * OMEGA / wd * (wd * t).sin(),
    ]
}

fn max_error(traj: &Trajectory) -> f64 {
    (0..traj.len())
        .map(|i| {
            let ex = exact(traj.times()[i]);
            let s = traj.state(i);
            (s[0] - ex[0]).abs().max((s[1] - ex[1]).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn analytic_oracle_all_methods() {
    let cases = [
        IntegratorConfig::rk4(1e-3, 16.0, 0.05),
        IntegratorConfig::adaptive(Method::Dp54, 1e-11, 1e-13, 16.0, 0.05),
        IntegratorConfig::adaptive(Method::Dop853, 1e-11, 1e-13, 16.0, 0.05),
    ];
    for cfg in cases {
        let traj = integrate(oscillator, &[1.0, 0.0], &cfg).unwrap();
        assert_eq!(traj.len(), 321);
        let err = max_error(&traj);
        assert!(err < 1e-8, "{:?}: {err}", cfg.method);
        assert!((traj.times()[320] - 16.0).abs() < 1e-12);
    }
}

/// Constant-step propagation through an embedded pair, bypassing step control.
fn fixed_steps<S: EmbeddedStepper>(h: f64, t_end: f64) -> [f64; 2] {
    let mut st = S::new(2);
    let mut y = vec![1.0, 0.0];
    let mut f0 = vec![0.0; 2];
    let mut y_new = vec![0.0; 2];
    let mut f = oscillator;
    oscillator(0.0, &y, &mut f0).unwrap();
    let n = (t_end / h).round() as usize;
    for i in 0..n {
        st.attempt(&mut f, i as f64 * h, &y, &f0, h, 1.0, 1.0, &mut y_new).unwrap();
        std::mem::swap(&mut y, &mut y_new);
        f0.copy_from_slice(st.endpoint_derivative());
    }
    [y[0], y[1]]
}

fn rk4_fixed(h: f64, t_end: f64) -> [f64; 2] {
    let cfg = IntegratorConfig::rk4(h, t_end, t_end);
    let traj = integrate(oscillator, &[1.0, 0.0], &cfg).unwrap();
    let s = traj.state(1);
    [s[0], s[1]]
}

fn observed_order(solve: impl Fn(f64) -> [f64; 2], h: f64, t_end: f64) -> f64 {
    let ex = exact(t_end);
    let err = |y: [f64; 2]| (y[0] - ex[0]).abs().max((y[1] - ex[1]).abs());
    (err(solve(h)) / err(solve(h / 2.0))).log2()
}

#[test]
fn rk4_error_at_coarse_step_follows_truncation_estimate() {
    // global error ~ C h^4: the dt = 0.01 run sits ~1e4 above the dt = 0.001 run
    let coarse = max_error(&integrate(oscillator, &[1.0, 0.0], &IntegratorConfig::rk4(0.01, 16.0, 0.01)).unwrap());
    let fine = max_error(&integrate(oscillator, &[1.0, 0.0], &IntegratorConfig::rk4(0.001, 16.0, 0.01)).unwrap());
    let ratio = coarse / fine;
    assert!((ratio.log10() - 4.0).abs() < 0.1, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn convergence_orders() {
    let t_end = 4.0;
    let p4 = observed_order(|h| rk4_fixed(h, t_end), 0.05, t_end);
    assert!((p4 - 4.0).abs() < 0.2, "rk4 order {p4}");
    let p5 = observed_order(|h| fixed_steps::<Dopri5Stepper>(h, t_end), 0.025, t_end);
    assert!((p5 - 5.0).abs() < 0.3, "dp54 order {p5}");
    let p8 = observed_order(|h| fixed_steps::<Dop853Stepper>(h, t_end), 0.1, t_end);
    assert!((p8 - 8.0).abs() < 0.5, "dop853 order {p8}");
}

#[test]
fn dense_output_matches_step_endpoints() {
    // a coarse output grid forces interpolation inside long steps
    let cfg = IntegratorConfig::adaptive(Method::Dop853, 1e-9, 1e-11, 20.0, 1.0);
    let traj = integrate(oscillator, &[1.0, 0.0], &cfg).unwrap();
    assert!(max_error(&traj) < 1e-7);
    assert!(traj.stats.steps > 0);
    assert!(traj.stats.evaluations > 12 * traj.stats.steps);
}

#[test]
fn zero_field_keeps_state() {
    let zero = |_t: f64, _y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy.iter_mut().for_each(|v| *v = 0.0);
        Ok(())
    };
    let y0 = [0.3, -1.2, 4.0];
    for m in [Method::Dp54, Method::Dop853] {
        let traj = integrate(zero, &y0, &IntegratorConfig::adaptive(m, 1e-8, 1e-10, 5.0, 0.5)).unwrap();
        for i in 0..traj.len() {
            assert_eq!(traj.state(i), &y0);
        }
    }
    let traj = integrate(zero, &y0, &IntegratorConfig::rk4(0.01, 1.0, 0.1)).unwrap();
    assert_eq!(traj.state(10), &y0);
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let cfg = IntegratorConfig::adaptive(Method::Dp54, 1e-8, 1e-10, 30.0, 0.05);
    let a = integrate(oscillator, &[1.0, 0.0], &cfg).unwrap();
    let b = integrate(oscillator, &[1.0, 0.0], &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn blow_up_is_reported() {
    let explode = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy[0] = y[0] * y[0];
        Ok(())
    };
    let err = integrate(explode, &[1.0], &IntegratorConfig::rk4(0.01, 5.0, 0.01)).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }));
    let err = integrate(
        explode,
        &[1.0],
        &IntegratorConfig::adaptive(Method::Dp54, 1e-8, 1e-10, 5.0, 0.01),
    )
    .unwrap_err();
    assert!(matches!(err, Error::StepUnderflow { .. } | Error::NonFinite { .. }));
}

#[test]
fn field_errors_propagate() {
    let failing = |t: f64, _y: &[f64], _dy: &mut [f64]| -> Result<()> {
        if t > 1.0 {
            Err(Error::OutOfRange { t, start: 0.0, end: 1.0 })
        } else {
            Ok(())
        }
    };
    let err = integrate(
        failing,
        &[0.0],
        &IntegratorConfig::adaptive(Method::Dop853, 1e-6, 1e-8, 2.0, 0.1),
    )
    .unwrap_err();
    assert!(matches!(err, Error::OutOfRange { .. }));
}

#[test]
fn config_validation() {
    let mut cfg = IntegratorConfig::rk4(0.01, 16.0, 0.015);
    assert!(cfg.validate().is_err());
    cfg.output_dt = 0.05;
    assert!(cfg.validate().is_ok());
    cfg.dt_fixed = None;
    assert!(cfg.validate().is_err());
    let bad = IntegratorConfig::adaptive(Method::Dp54, 0.0, 1e-8, 10.0, 0.05);
    assert!(bad.validate().is_err());
}
