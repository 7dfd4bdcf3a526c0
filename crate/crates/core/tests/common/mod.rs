//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use duffing_ring::RegimeParams;

/// `x'' + gamma x' + omega^2 x = 0` from `x(0) = 1`, `x'(0) = 0` (underdamped).
pub fn damped_oscillator(gamma: f64, omega: f64, t: f64) -> (f64, f64) {
    let wd = (omega * omega - 0.25 * gamma * gamma).sqrt();
    let decay = (-0.5 * gamma * t).exp();
    let (s, c) = (wd * t).sin_cos();
    let x = decay * (c + 0.5 * gamma / wd * s);
    let v = -decay * (omega * omega / wd) * s;
    (x, v)
}

/// Unitary DFT synthesis `x_j = N^{-1/2} sum_n u_n e^{2 pi i n j / N}` by direct summation.
pub fn synthesize(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    (0..n)
        .map(|j| {
            u.iter()
                .enumerate()
                .map(|(k, uk)| uk * Complex64::from_polar(1.0, 2.0 * PI * (k * j) as f64 / n as f64))
                .sum::<Complex64>()
                / (n as f64).sqrt()
        })
        .collect()
}

/// Unitary DFT analysis `u_n = N^{-1/2} sum_j x_j e^{-2 pi i n j / N}` of a real field.
pub fn analyze(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, xj)| xj * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64))
                .sum::<Complex64>()
                / (n as f64).sqrt()
        })
        .collect()
}

/// `F_n = sum T u_m1 u_m2 u_m3` over all ordered triples, with `T = 1/N` and
/// each triple landing on `n = m1 + m2 + m3 (mod N)`.
pub fn triple_sum_force(u: &[Complex64]) -> Vec<Complex64> {
    let n = u.len();
    let c = 1.0 / n as f64;
    let mut out = vec![Complex64::default(); n];
    for m1 in 0..n {
        for m2 in 0..n {
            for m3 in 0..n {
                out[(m1 + m2 + m3) % n] += c * u[m1] * u[m2] * u[m3];
            }
        }
    }
    out
}

/// Node field with an explicit dense Laplacian matrix.
pub fn dense_node_field(p: &RegimeParams, drive_node: usize, y: &[f64], s: f64) -> Vec<f64> {
    let n = y.len() / 2;
    let mut lap = vec![vec![0.0; n]; n];
    for (i, row) in lap.iter_mut().enumerate() {
        row[i] += 2.0;
        row[(i + 1) % n] -= 1.0;
        row[(i + n - 1) % n] -= 1.0;
    }
    let (x, v) = y.split_at(n);
    let mut dy = vec![0.0; 2 * n];
    for i in 0..n {
        dy[i] = v[i];
        let lx: f64 = (0..n).map(|j| lap[i][j] * x[j]).sum();
        let drive = if i == drive_node { s } else { 0.0 };
        dy[n + i] = -p.gamma * v[i] - p.omega0_sq * x[i] - p.alpha * x[i].powi(3) - p.k_c * lx + drive;
    }
    dy
}

/// Closure of a wavenumber set under `n = +-m1 +- m2 +- m3 (mod N)`, folded to `0..=N/2`.
pub fn brute_force_reachable(n: usize, drive: &[usize]) -> BTreeSet<usize> {
    let signed: Vec<i64> = drive.iter().flat_map(|&m| [m as i64, -(m as i64)]).collect();
    let mut out = BTreeSet::new();
    for &a in &signed {
        for &b in &signed {
            for &c in &signed {
                let k = (a + b + c).rem_euclid(n as i64) as usize;
                out.insert(k.min(n - k));
            }
        }
    }
    out
}

/// `|sum_m x[m] e^{-2 pi i bin m / L}|^2` by direct evaluation of each twiddle.
pub fn dft_power(x: &[f64], bin: usize) -> f64 {
    let l = x.len() as f64;
    let z: Complex64 = x
        .iter()
        .enumerate()
        .map(|(m, v)| v * Complex64::from_polar(1.0, -2.0 * PI * bin as f64 * m as f64 / l))
        .sum();
    z.norm_sqr()
}

/// Least-squares slope of `log10(err)` against `log10(h)`.
pub fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.log10()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
