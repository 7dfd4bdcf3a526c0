//! Equations of motion on the ring in node and mode coordinates, and the
//! cubic mode-coupling structure.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrate::{integrate, IntegratorConfig, Trajectory};
use crate::substrate::{apply_ring_laplacian, RingSubstrate};

/// The four rates of the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeParams {
    pub gamma: f64,
    pub omega0_sq: f64,
    pub alpha: f64,
    pub k_c: f64,
}

impl RegimeParams {
    /// Harmonic ring: `gamma = 0.5`, no on-site term, `K_c = (2 pi)^2`.
    pub const LINEAR: Self = Self {
        gamma: 0.5,
        omega0_sq: 0.0,
        alpha: 0.0,
        k_c: 4.0 * PI * PI,
    };

    /// Duffing ring working point.
    pub const DUFFING: Self = Self {
        gamma: 0.15,
        omega0_sq: 1.0,
        alpha: 1.5,
        k_c: 0.35,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", "damping must be finite and non-negative"));
        }
        if !(self.omega0_sq >= 0.0) || !self.omega0_sq.is_finite() {
            return Err(invalid("omega0_sq", "on-site stiffness must be finite and non-negative"));
        }
        if !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        if !(self.k_c > 0.0) || !self.k_c.is_finite() {
            return Err(invalid("k_c", "coupling must be positive"));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Node-coordinate acceleration for state `(x, v)`, drive value `s` at `drive_node`.
#[inline]
pub fn node_acceleration(p: &RegimeParams, x: &[f64], v: &[f64], s: f64, drive_node: usize, acc: &mut [f64]) {
    apply_ring_laplacian(x, acc);
    for i in 0..x.len() {
        let xi = x[i];
        acc[i] = -p.gamma * v[i] - p.omega0_sq * xi - p.alpha * xi * xi * xi - p.k_c * acc[i];
    }
    acc[drive_node] += s;
}

fn check_node(n: usize, drive_node: usize) -> Result<()> {
    if drive_node >= n {
        return Err(invalid("drive_node", format!("{drive_node} is not a node of a {n}-ring")));
    }
    Ok(())
}

/// Vector field on `(x_0..x_{N-1}, v_0..v_{N-1})` with the drive injected at one node.
pub fn node_rhs<'a, D>(
    sub: &RingSubstrate,
    p: RegimeParams,
    drive_node: usize,
    drive: D,
) -> Result<impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a>
where
    D: Fn(f64) -> Result<f64> + 'a,
{
    let n = sub.n_nodes();
    check_node(n, drive_node)?;
    Ok(move |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let (x, v) = y.split_at(n);
        let (dx, dv) = dy.split_at_mut(n);
        dx.copy_from_slice(v);
        node_acceleration(&p, x, v, drive(t)?, drive_node, dv);
        Ok(())
    })
}

/// Decoupled harmonic modes on `(a_0..a_{N-1}, adot_0..adot_{N-1})` in the real
/// eigenbasis. Only valid without the cubic term.
pub fn mode_rhs_linear<'a, D>(
    sub: &RingSubstrate,
    p: RegimeParams,
    drive_node: usize,
    drive: D,
) -> Result<impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a>
where
    D: Fn(f64) -> Result<f64> + 'a,
{
    if !p.is_linear() {
        return Err(invalid("alpha", "decoupled mode dynamics require alpha = 0"));
    }
    let n = sub.n_nodes();
    check_node(n, drive_node)?;
    let omega_sq: Vec<f64> = sub.eigenvalues().iter().map(|l| p.omega0_sq + p.k_c * l).collect();
    let coupling: Vec<f64> = (0..n).map(|c| sub.basis_entry(drive_node, c)).collect();
    Ok(move |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let s = drive(t)?;
        let (a, ad) = y.split_at(n);
        let (da, dad) = dy.split_at_mut(n);
        da.copy_from_slice(ad);
        for c in 0..n {
            dad[c] = -p.gamma * ad[c] - omega_sq[c] * a[c] + coupling[c] * s;
        }
        Ok(())
    })
}

/// Full nonlinear dynamics in real mode coordinates, with the cubic force
/// evaluated through the complex-basis coupling tensor.
pub fn mode_rhs<'a, D>(
    sub: &'a RingSubstrate,
    p: RegimeParams,
    drive_node: usize,
    drive: D,
) -> Result<impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + 'a>
where
    D: Fn(f64) -> Result<f64> + 'a,
{
    let n = sub.n_nodes();
    check_node(n, drive_node)?;
    let tensor = CouplingTensorView::new(n)?;
    let omega_sq: Vec<f64> = sub.eigenvalues().iter().map(|l| p.omega0_sq + p.k_c * l).collect();
    let coupling: Vec<f64> = (0..n).map(|c| sub.basis_entry(drive_node, c)).collect();
    let mut u = vec![Complex64::default(); n];
    let mut force = vec![Complex64::default(); n];
    let mut real_force = vec![0.0; n];
    Ok(move |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let s = drive(t)?;
        let (a, ad) = y.split_at(n);
        let (da, dad) = dy.split_at_mut(n);
        da.copy_from_slice(ad);
        if p.alpha != 0.0 {
            real_to_complex(a, &mut u);
            tensor.force_into(&u, &mut force)?;
            complex_to_real(&force, &mut real_force);
        }
        for c in 0..n {
            let cubic = if p.alpha != 0.0 { p.alpha * real_force[c] } else { 0.0 };
            dad[c] = -p.gamma * ad[c] - omega_sq[c] * a[c] - cubic + coupling[c] * s;
        }
        Ok(())
    })
}

/// Real-basis amplitudes (column order of [`RingSubstrate`]) to complex
/// Fourier amplitudes `u_0..u_{N-1}` with `u_{N-k} = conj(u_k)`.
pub fn real_to_complex(a: &[f64], u: &mut [Complex64]) {
    let n = a.len();
    let half = n / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    u[0] = Complex64::new(a[0], 0.0);
    for k in 1..half {
        let (ac, as_) = (a[2 * k - 1], a[2 * k]);
        u[k] = Complex64::new(ac * r, -as_ * r);
        u[n - k] = u[k].conj();
    }
    u[half] = Complex64::new(a[n - 1], 0.0);
}

/// Inverse of [`real_to_complex`]; only the `k <= N/2` half is read.
pub fn complex_to_real(u: &[Complex64], a: &mut [f64]) {
    let n = u.len();
    let half = n / 2;
    let s2 = std::f64::consts::SQRT_2;
    a[0] = u[0].re;
    for k in 1..half {
        a[2 * k - 1] = s2 * u[k].re;
        a[2 * k] = -s2 * u[k].im;
    }
    a[n - 1] = u[half].re;
}

/// Whether any of `+-m1 +- m2 +- m3` is congruent to `n` modulo `N`.
pub fn selection_rule(n_nodes: usize, m1: usize, m2: usize, m3: usize, n: usize) -> bool {
    let nn = n_nodes as i64;
    let target = (n as i64).rem_euclid(nn);
    for s1 in [-1i64, 1] {
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let sum = s1 * m1 as i64 + s2 * m2 as i64 + s3 * m3 as i64;
                if sum.rem_euclid(nn) == target {
                    return true;
                }
            }
        }
    }
    false
}

/// Wavenumbers in `0..=N/2` populated at third order from the given drive modes.
pub fn reachable_set(n_nodes: usize, drive_modes: &[usize]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for n in 0..=n_nodes / 2 {
        let hit = drive_modes.iter().any(|&m1| {
            drive_modes
                .iter()
                .any(|&m2| drive_modes.iter().any(|&m3| selection_rule(n_nodes, m1, m2, m3, n)))
        });
        if hit {
            out.insert(n);
        }
    }
    out
}

/// Lazily evaluated cubic coupling tensor in the complex Fourier basis,
/// `T(n; m1, m2, m3) = N^{-1} [m1 + m2 + m3 = n mod N]` for the unitary
/// basis `exp(2 pi i m j / N) / sqrt(N)`.
#[derive(Clone)]
pub struct CouplingTensorView {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CouplingTensorView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CouplingTensorView").field("n", &self.n).finish()
    }
}

impl CouplingTensorView {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 4 || n_nodes % 2 == 1 {
            return Err(Error::InvalidNodeCount(n_nodes));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n: n_nodes,
            forward: planner.plan_fft_forward(n_nodes),
            inverse: planner.plan_fft_inverse(n_nodes),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn entry(&self, n: usize, m1: usize, m2: usize, m3: usize) -> f64 {
        if (m1 + m2 + m3) % self.n == n % self.n {
            1.0 / self.n as f64
        } else {
            0.0
        }
    }

    /// The `N^2` ordered triples contributing to output wavenumber `n`.
    pub fn triples(&self, n: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let nn = self.n;
        (0..nn).flat_map(move |m1| (0..nn).map(move |m2| (m1, m2, (2 * nn + n % nn - m1 - m2) % nn)))
    }

    pub fn check_reality(&self, u: &[Complex64]) -> Result<()> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: u.len(),
            });
        }
        let scale = u.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let tol = 1e-10 * scale;
        for m in 0..=self.n / 2 {
            let dev = (u[(self.n - m) % self.n] - u[m].conj()).norm();
            if dev > tol {
                return Err(Error::RealityViolation {
                    wavenumber: m,
                    deviation: dev,
                });
            }
        }
        Ok(())
    }

    /// Mode-space image of pointwise cubing: to nodes, cube, back to modes.
    pub fn force(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::default(); self.n];
        self.force_into(u, &mut out)?;
        Ok(out)
    }

    pub fn force_into(&self, u: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check_reality(u)?;
        let scale = 1.0 / (self.n as f64).sqrt();
        out.copy_from_slice(u);
        self.inverse.process(out);
        for z in out.iter_mut() {
            let x = z.re * scale;
            *z = Complex64::new(x * x * x, 0.0);
        }
        self.forward.process(out);
        for z in out.iter_mut() {
            *z *= scale;
        }
        Ok(())
    }
}

/// Total mechanical energy: kinetic, on-site quadratic and quartic, and coupling.
pub fn ring_energy(p: &RegimeParams, x: &[f64], v: &[f64]) -> f64 {
    let n = x.len();
    let mut e = 0.0;
    for i in 0..n {
        let xi = x[i];
        let d = xi - x[(i + 1) % n];
        e += 0.5 * v[i] * v[i] + 0.5 * p.omega0_sq * xi * xi + 0.25 * p.alpha * xi * xi * xi * xi + 0.5 * p.k_c * d * d;
    }
    e
}

/// Integrates the node equations from rest.
pub fn simulate<D>(
    sub: &RingSubstrate,
    p: RegimeParams,
    drive_node: usize,
    drive: D,
    cfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    D: Fn(f64) -> Result<f64>,
{
    p.validate()?;
    let rhs = node_rhs(sub, p, drive_node, drive)?;
    integrate(rhs, &vec![0.0; 2 * sub.n_nodes()], cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{IntegratorConfig, Method};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real_modes(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    /// Direct triple sum: cube the unitary synthesis and project back, so each
    /// matching triple carries `N^{-3/2} * N^{-1/2} * N = 1/N`.
    fn triple_sum(u: &[Complex64]) -> Vec<Complex64> {
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

    #[test]
    fn rest_state_is_fixed_point() {
        let sub = RingSubstrate::new(8).unwrap();
        let mut f = node_rhs(&sub, RegimeParams::DUFFING, 0, |_| Ok(0.0)).unwrap();
        let mut dy = vec![1.0; 16];
        f(0.3, &[0.0; 16], &mut dy).unwrap();
        assert!(dy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_state_feels_only_onsite_term() {
        let sub = RingSubstrate::new(8).unwrap();
        let p = RegimeParams::DUFFING.with_alpha(0.0);
        let mut f = node_rhs(&sub, p, 0, |_| Ok(0.0)).unwrap();
        let mut y = vec![0.7; 8];
        y.extend(vec![0.0; 8]);
        let mut dy = vec![0.0; 16];
        f(0.0, &y, &mut dy).unwrap();
        for v in &dy[8..] {
            assert!((v + 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn sign_symmetry_is_exact() {
        let sub = RingSubstrate::new(16).unwrap();
        let y = random_real_modes(32, 9);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let mut f = node_rhs(&sub, RegimeParams::DUFFING, 3, |t: f64| Ok((2.0 * t).cos())).unwrap();
        let mut g = node_rhs(&sub, RegimeParams::DUFFING, 3, |t: f64| Ok(-(2.0 * t).cos())).unwrap();
        let (mut a, mut b) = (vec![0.0; 32], vec![0.0; 32]);
        f(0.4, &y, &mut a).unwrap();
        g(0.4, &neg, &mut b).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(*p, -*q);
        }
    }

    #[test]
    fn selection_rule_examples() {
        assert!(selection_rule(64, 1, 1, 1, 3));
        assert!(selection_rule(8, 3, 3, 3, 1));
        assert!(!selection_rule(64, 1, 1, 1, 2));
        assert_eq!(reachable_set(64, &[1, 2]), (0..=6).collect());
        assert_eq!(reachable_set(64, &[5]), [5, 15].into_iter().collect());
    }

    #[test]
    fn triple_count_is_n_squared() {
        for n in [4usize, 6, 8, 12, 16] {
            let t = CouplingTensorView::new(n).unwrap();
            for out in 0..n {
                let mut count = 0;
                for m1 in 0..n {
                    for m2 in 0..n {
                        for m3 in 0..n {
                            if t.entry(out, m1, m2, m3) != 0.0 {
                                count += 1;
                            }
                        }
                    }
                }
                assert_eq!(count, n * n);
                assert_eq!(t.triples(out).count(), n * n);
                assert!(t.triples(out).all(|(a, b, c)| (a + b + c) % n == out));
            }
        }
    }

    #[test]
    fn transform_path_matches_triple_sum() {
        for n in [4usize, 8] {
            let t = CouplingTensorView::new(n).unwrap();
            let a = random_real_modes(n, n as u64);
            let mut u = vec![Complex64::default(); n];
            real_to_complex(&a, &mut u);
            let fast = t.force(&u).unwrap();
            let slow = triple_sum(&u);
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).norm() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn complex_force_equals_projected_node_cube() {
        let n = 16;
        let sub = RingSubstrate::new(n).unwrap();
        let t = CouplingTensorView::new(n).unwrap();
        let a = random_real_modes(n, 77);
        let x = sub.reconstruct(&a);
        let cubed: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let expect = sub.project(&cubed);
        let mut u = vec![Complex64::default(); n];
        real_to_complex(&a, &mut u);
        let mut got = vec![0.0; n];
        complex_to_real(&t.force(&u).unwrap(), &mut got);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_populates_third_order_images_only() {
        let n = 32;
        let t = CouplingTensorView::new(n).unwrap();
        let m = 3;
        let mut u = vec![Complex64::default(); n];
        u[m] = Complex64::new(0.4, -0.2);
        u[n - m] = u[m].conj();
        let f = t.force(&u).unwrap();
        let allowed = [m, 3 * m, n - m, n - 3 * m];
        for (k, z) in f.iter().enumerate() {
            if allowed.contains(&k) {
                assert!(z.norm() > 1e-6);
            } else {
                assert!(z.norm() < 1e-14, "wavenumber {k} = {z}");
            }
        }
        assert!(t
            .force(&vec![Complex64::default(); n])
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let t = CouplingTensorView::new(8).unwrap();
        let mut u = vec![Complex64::default(); 8];
        u[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(t.force(&u), Err(Error::RealityViolation { wavenumber: 1, .. })));
    }

    #[test]
    fn linear_modes_reject_cubic_term() {
        let sub = RingSubstrate::new(8).unwrap();
        assert!(mode_rhs_linear(&sub, RegimeParams::DUFFING, 0, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn linear_mode_field_matches_projected_node_field() {
        let sub = RingSubstrate::new(32).unwrap();
        let p = RegimeParams::LINEAR;
        let cfg = IntegratorConfig::rk4(0.01, 8.0, 0.05);
        let drive = |t: f64| Ok((7.3 * t).cos());
        let nodes = simulate(&sub, p, 0, drive, &cfg).unwrap();
        let modes = integrate(mode_rhs_linear(&sub, p, 0, drive).unwrap(), &[0.0; 64], &cfg).unwrap();
        for i in 0..nodes.len() {
            let a = sub.project(&nodes.state(i)[..32]);
            for (x, y) in a.iter().zip(&modes.state(i)[..32]) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn energy_decays_without_drive() {
        let sub = RingSubstrate::new(16).unwrap();
        let p = RegimeParams::DUFFING;
        let mut y0 = random_real_modes(16, 5);
        y0.extend(random_real_modes(16, 6));
        let rhs = node_rhs(&sub, p, 0, |_| Ok(0.0)).unwrap();
        let cfg = IntegratorConfig::adaptive(Method::Dop853, 1e-10, 1e-12, 30.0, 0.05);
        let traj = integrate(rhs, &y0, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..traj.len() {
            let s = traj.state(i);
            let e = ring_energy(&p, &s[..16], &s[16..]);
            assert!(e <= prev + 1e-9, "step {i}: {e} > {prev}");
            prev = e;
        }
        assert!(prev < ring_energy(&p, &y0[..16], &y0[16..]));
    }
}
