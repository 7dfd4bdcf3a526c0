mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;

use duffing_ring::classify::{one_hot, train_ridge};
use duffing_ring::drive::{make_noise, noise_sigma};
use duffing_ring::dynamics::{node_rhs, reachable_set};
use duffing_ring::readout::{harmonic_energies, hilbert_envelope, steady_window};
use duffing_ring::shape::{fold_pi, trig_interpolate};
use duffing_ring::{CouplingTensorView, DriveSpec, NoiseSpec, RegimeParams, RingSubstrate, SnrConvention, Trajectory};

fn even_n(lo: usize, hi: usize) -> impl Strategy<Value = usize> {
    (lo / 2..=hi / 2).prop_map(|h| 2 * h)
}

fn field(n_max: usize) -> impl Strategy<Value = Vec<f64>> {
    even_n(4, n_max).prop_flat_map(|n| prop::collection::vec(-2.0..2.0f64, n))
}

fn params() -> impl Strategy<Value = RegimeParams> {
    (0.01..1.0f64, 0.0..2.0f64, 0.0..3.0f64, 0.01..40.0f64).prop_map(|(gamma, omega0_sq, alpha, k_c)| RegimeParams {
        gamma,
        omega0_sq,
        alpha,
        k_c,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_preserves_norm_and_round_trips(x in field(64)) {
        let sub = RingSubstrate::new(x.len()).unwrap();
        let a = sub.project(&x);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ea: f64 = a.iter().map(|v| v * v).sum();
        prop_assert!((ex - ea).abs() <= 1e-12 * ex.max(1.0));
        let back = sub.reconstruct(&a);
        for (u, v) in back.iter().zip(&x) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn fold_lands_in_half_open_interval(phi in -50.0..50.0f64) {
        let f = fold_pi(phi);
        prop_assert!((0.0..PI).contains(&f));
        prop_assert_eq!(fold_pi(f), f);
        let turns = (phi - f) / PI;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn interpolant_hits_every_sample(samples in even_n(4, 64).prop_flat_map(|n| prop::collection::vec(-5.0..5.0f64, n))) {
        let n = samples.len();
        for (m, s) in samples.iter().enumerate() {
            let v = trig_interpolate(&samples, 2.0 * PI * m as f64 / n as f64);
            prop_assert!((v - s).abs() < 1e-10, "m = {m}: {v} vs {s}");
        }
    }

    #[test]
    fn reachable_set_matches_brute_force(
        n in even_n(4, 96),
        drive in prop::collection::btree_set(1usize..48, 1..4),
    ) {
        let drive: Vec<usize> = drive.into_iter().map(|m| m % (n / 2 + 1)).collect();
        let got = reachable_set(n, &drive);
        prop_assert_eq!(got, common::brute_force_reachable(n, &drive));
    }

    #[test]
    fn tensor_force_matches_triple_sum(x in field(16)) {
        let tensor = CouplingTensorView::new(x.len()).unwrap();
        let u = common::analyze(&x);
        let fast = tensor.force(&u).unwrap();
        let slow = common::triple_sum_force(&u);
        let scale = slow.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn node_field_matches_dense_oracle(x in field(32), p in params(), s in -3.0..3.0f64, node_seed in 0usize..1000) {
        let n = x.len();
        let node = node_seed % n;
        let y: Vec<f64> = x.iter().copied().chain(x.iter().map(|v| 0.7 * v - 0.1)).collect();
        let sub = RingSubstrate::new(n).unwrap();
        let mut rhs = node_rhs(&sub, p, node, move |_| Ok(s)).unwrap();
        let mut dy = vec![0.0; 2 * n];
        rhs(0.0, &y, &mut dy).unwrap();
        let want = common::dense_node_field(&p, node, &y, s);
        for (a, b) in dy.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn field_is_odd_under_sign_flip(x in field(32), p in params(), s in -3.0..3.0f64) {
        let n = x.len();
        let sub = RingSubstrate::new(n).unwrap();
        let y: Vec<f64> = x.iter().copied().chain(x.iter().rev().copied()).collect();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let mut plus = node_rhs(&sub, p, 0, move |_| Ok(s)).unwrap();
        let mut minus = node_rhs(&sub, p, 0, move |_| Ok(-s)).unwrap();
        let (mut a, mut b) = (vec![0.0; 2 * n], vec![0.0; 2 * n]);
        plus(0.0, &y, &mut a).unwrap();
        minus(0.0, &neg, &mut b).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert_eq!(*u, -*v);
        }
    }

    #[test]
    fn two_tone_window_spectrum_ignores_phase(
        a1 in 0.05..2.0f64,
        a2 in 0.05..2.0f64,
        phase in 0.0..(2.0 * PI),
        t_tot in prop::sample::select(vec![100.0, 200.0, 300.0, 400.0]),
    ) {
        let (f, dt) = (0.18, 0.05);
        let w = steady_window(t_tot, f, dt).unwrap();
        let drive = DriveSpec::TwoTone { a1, a2, f_drive: f, delta_phi2: phase };
        let x: Vec<f64> = (0..w.length).map(|m| drive.eval((w.start_index + m) as f64 * dt)).collect();
        let half = w.length as f64 / 2.0;
        let p1 = common::dft_power(&x, w.n_ss);
        let p2 = common::dft_power(&x, 2 * w.n_ss);
        prop_assert!((p1 / (a1 * half).powi(2) - 1.0).abs() < 1e-9);
        prop_assert!((p2 / (a2 * half).powi(2) - 1.0).abs() < 1e-9);
        prop_assert!(common::dft_power(&x, 3 * w.n_ss) < 1e-12 * p1.max(p2));
    }

    #[test]
    fn harmonic_bins_are_exact(
        k in 1usize..=6,
        amp in 0.1..3.0f64,
        phase in 0.0..(2.0 * PI),
        t_tot in prop::sample::select(vec![100.0, 200.0, 300.0, 400.0]),
    ) {
        let (f, dt, nodes) = (0.18, 0.05, 3);
        let w = steady_window(t_tot, f, dt).unwrap();
        let len = w.start_index + w.length;
        let times: Vec<f64> = (0..len).map(|i| i as f64 * dt).collect();
        let mut states = Vec::with_capacity(len * nodes);
        for &t in &times {
            for j in 0..nodes {
                states.push(amp * (2.0 * PI * k as f64 * f * t + phase + j as f64).cos());
            }
        }
        let traj = Trajectory::new(times, nodes, states);
        let e = harmonic_energies(&traj, nodes, w, 6).unwrap();
        let want = nodes as f64 * (amp * w.length as f64 / 2.0).powi(2);
        for j in 1..=6 {
            if j == k {
                prop_assert!((e.get(j) / want - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(e.get(j) < 1e-12 * want);
            }
        }
    }

    #[test]
    fn envelope_dominates_signal(x in prop::collection::vec(-3.0..3.0f64, 8..300)) {
        let env = hilbert_envelope(&x);
        for (e, v) in env.iter().zip(&x) {
            prop_assert!(*e >= v.abs() - 1e-12);
        }
    }

    #[test]
    fn noise_is_seeded_and_scales_linearly(seed in any::<u64>(), snr in -10.0..40.0f64, scale in 0.1..5.0f64) {
        let spec = NoiseSpec {
            snr_db: snr,
            convention: SnrConvention::Power,
            cutoff: 5.0,
            filter_order: 4,
            seed,
            grid_dt: 0.05,
            total_time: 20.0,
        };
        let a = make_noise(&spec, scale).unwrap();
        let b = make_noise(&spec, scale).unwrap();
        prop_assert_eq!(a.values(), b.values());
        let c = make_noise(&spec, 2.0 * scale).unwrap();
        prop_assert!((c.sigma() / a.sigma() - 2.0).abs() < 1e-12);
        prop_assert!((a.sigma() - noise_sigma(&spec, scale)).abs() < 1e-15);
        for (u, v) in a.values().iter().zip(c.values()) {
            prop_assert!((2.0 * u - v).abs() <= 1e-12 * v.abs().max(1e-3));
        }
        let other = make_noise(&NoiseSpec { seed: seed ^ 1, ..spec }, scale).unwrap();
        prop_assert_ne!(a.values(), other.values());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ridge_scores_invariant_under_feature_scaling(
        rows in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 5), 12..40),
        c in 0.05..20.0f64,
        lambda in 1e-4..1.0f64,
    ) {
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 4).collect();
        let x = DMatrix::from_fn(rows.len(), 5, |i, j| rows[i][j]);
        let y = one_hot(&labels, 4);
        let base = train_ridge(&x, &y, lambda).unwrap();
        let scaled = train_ridge(&(&x * c), &y, lambda * c * c).unwrap();
        let s0 = base.scores(&x);
        let s1 = scaled.scores(&(&x * c));
        let tol = 1e-8 * s0.amax().max(1.0);
        prop_assert!((s0 - s1).amax() <= tol);
    }
}
