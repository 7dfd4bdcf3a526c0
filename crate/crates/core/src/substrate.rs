//! The cycle graph C_N and its real Fourier eigenbasis.
//!
//! Columns of the basis are ordered `[n=0, (cos 1, sin 1), (cos 2, sin 2), ..., n=N/2]`
//! and every column has unit Euclidean norm, so the basis matrix `V` is
//! orthogonal and projections preserve energy exactly.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::RegimeParams;
use crate::error::{Error, Result};

/// Parity class of a basis column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Uniform,
    Cosine,
    Sine,
    Nyquist,
}

/// Wavenumber and parity carried by one column of the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeIndex {
    pub wavenumber: usize,
    pub parity: Parity,
}

/// Graph Laplacian eigenvalue `4 sin^2(pi n / N)` for wavenumber `n`.
pub fn laplacian_eigenvalue(n_nodes: usize, wavenumber: usize) -> f64 {
    let s = (PI * wavenumber as f64 / n_nodes as f64).sin();
    4.0 * s * s
}

#[derive(Debug, Clone)]
pub struct RingSubstrate {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column-major: column `c` occupies `basis[c * n .. (c + 1) * n]`.
    basis: Vec<f64>,
    modes: Vec<ModeIndex>,
}

impl RingSubstrate {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 4 || !n_nodes.is_multiple_of(2) {
            return Err(Error::InvalidNodeCount(n_nodes));
        }
        let n = n_nodes;
        let nf = n as f64;
        let mut basis = Vec::with_capacity(n * n);
        let mut modes = Vec::with_capacity(n);
        let mut eigenvalues = Vec::with_capacity(n);

        let single = (1.0 / nf).sqrt();
        let pair = (2.0 / nf).sqrt();

        basis.extend(std::iter::repeat_n(single, n));
        modes.push(ModeIndex {
            wavenumber: 0,
            parity: Parity::Uniform,
        });
        eigenvalues.push(0.0);

        for k in 1..n / 2 {
            let lam = laplacian_eigenvalue(n, k);
            for (parity, trig) in [(Parity::Cosine, f64::cos as fn(f64) -> f64), (Parity::Sine, f64::sin)] {
                basis.extend((0..n).map(|j| {
                    // integer reduction keeps the phase argument exact for large j·k
                    let phase = 2.0 * PI * ((k * j) % n) as f64 / nf;
                    pair * trig(phase)
                }));
                modes.push(ModeIndex { wavenumber: k, parity });
                eigenvalues.push(lam);
            }
        }

        basis.extend((0..n).map(|j| if j % 2 == 0 { single } else { -single }));
        modes.push(ModeIndex {
            wavenumber: n / 2,
            parity: Parity::Nyquist,
        });
        eigenvalues.push(4.0);

        Ok(Self {
            n,
            eigenvalues,
            basis,
            modes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Eigenvalue of each column (degenerate pairs repeat).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.basis[col * self.n..(col + 1) * self.n]
    }

    /// Entry `V[node, col]`.
    pub fn basis_entry(&self, node: usize, col: usize) -> f64 {
        self.basis[col * self.n + node]
    }

    /// Column index holding wavenumber `k` with the given parity, if it exists.
    pub fn column_of(&self, wavenumber: usize, parity: Parity) -> Option<usize> {
        let half = self.n / 2;
        match parity {
            Parity::Uniform if wavenumber == 0 => Some(0),
            Parity::Nyquist if wavenumber == half => Some(self.n - 1),
            Parity::Cosine if (1..half).contains(&wavenumber) => Some(2 * wavenumber - 1),
            Parity::Sine if (1..half).contains(&wavenumber) => Some(2 * wavenumber),
            _ => None,
        }
    }

    /// Columns carrying wavenumber `k` (one or two).
    pub fn columns_for_wavenumber(&self, wavenumber: usize) -> Vec<usize> {
        let half = self.n / 2;
        match wavenumber {
            0 => vec![0],
            k if k == half => vec![self.n - 1],
            k if k < half => vec![2 * k - 1, 2 * k],
            _ => Vec::new(),
        }
    }

    /// `a = V^T x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.project_into(x, &mut out);
        out
    }

    pub fn project_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.column(c).iter().zip(x).map(|(v, xi)| v * xi).sum();
        }
    }

    /// `x = V a`.
    pub fn reconstruct(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.reconstruct_into(a, &mut out);
        out
    }

    pub fn reconstruct_into(&self, a: &[f64], out: &mut [f64]) {
        debug_assert_eq!(a.len(), self.n);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (c, &ac) in a.iter().enumerate() {
            if ac == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.column(c)) {
                *o += ac * v;
            }
        }
    }

    /// Applies the circulant Laplacian stencil `(L x)_i = 2 x_i - x_{i-1} - x_{i+1}`.
    pub fn apply_laplacian(&self, x: &[f64], out: &mut [f64]) {
        apply_ring_laplacian(x, out);
    }

    /// Dense `N x N` Laplacian `D - A`, row-major.
    pub fn dense_laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = 2.0;
            l[i * n + (i + 1) % n] -= 1.0;
            l[i * n + (i + n - 1) % n] -= 1.0;
        }
        l
    }

    /// Mode frequency of every column: `sqrt(omega0^2 + K_c lambda)`.
    pub fn mode_frequencies(&self, params: &RegimeParams) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|lam| (params.omega0_sq + params.k_c * lam).sqrt())
            .collect()
    }

    /// Mode frequency per wavenumber `0..=N/2`.
    pub fn dispersion(&self, params: &RegimeParams) -> Vec<f64> {
        (0..=self.n / 2)
            .map(|k| (params.omega0_sq + params.k_c * laplacian_eigenvalue(self.n, k)).sqrt())
            .collect()
    }
}

pub(crate) fn apply_ring_laplacian(x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for i in 0..n {
        let prev = x[(i + n - 1) % n];
        let next = x[(i + 1) % n];
        out[i] = 2.0 * x[i] - prev - next;
    }
}
