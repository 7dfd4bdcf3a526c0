//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use duffing_ring::{Method, ShapeProtocol, Trajectory};

/// Deterministic smooth node field of length `n`.
pub fn node_field(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            0.4 * t.cos() + 0.2 * (3.0 * t + 0.5).sin() + 0.05 * (7.0 * t).cos()
        })
        .collect()
}

/// The Duffing shape protocol on a short horizon that still admits a steady window.
pub fn short_protocol(t_tot: f64) -> ShapeProtocol {
    ShapeProtocol::duffing(Method::Dp54, 1e-8, 1e-10, t_tot)
}

/// A synthetic harmonic-rich trajectory of `nodes` series sampled on the protocol grid.
pub fn synthetic_trajectory(p: &ShapeProtocol, nodes: usize) -> Trajectory {
    let n_out = p.integrator.n_outputs();
    let times: Vec<f64> = (0..n_out).map(|i| p.integrator.output_time(i)).collect();
    let mut states = Vec::with_capacity(n_out * nodes);
    for &t in &times {
        let w = 2.0 * PI * p.f_drive * t;
        for j in 0..nodes {
            let ph = j as f64 * 0.1;
            states.push((w + ph).cos() + 0.3 * (2.0 * w).cos() + 0.01 * (5.0 * w + ph).sin());
        }
    }
    Trajectory::new(times, nodes, states)
}
