//! Dormand–Prince 5(4) with the quartic continuous extension.

use super::EmbeddedStepper;
use crate::error::Result;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (the last row of `A`, first-same-as-last).
#[cfg(test)]
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

pub(crate) struct Dopri5Stepper {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    cont: [Vec<f64>; 5],
    evals: usize,
}

impl EmbeddedStepper for Dopri5Stepper {
    const ERROR_ORDER: f64 = 4.0;
    const DENSE: &'static str = "dopri5 quartic continuous extension";

    fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            cont: std::array::from_fn(|_| vec![0.0; dim]),
            evals: 0,
        }
    }

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
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let n = y.len();
        self.k[0].copy_from_slice(f0);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += a * self.k[j][i];
                    }
                }
                self.tmp[i] = y[i] + h * acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&self.tmp);
            }
            f(t + C[s] * h, &self.tmp, &mut self.k[s])?;
            self.evals += 1;
        }

        let mut acc = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (s, es) in E.iter().enumerate() {
                e += es * self.k[s][i];
            }
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            acc += r * r;
        }
        Ok((acc / n as f64).sqrt())
    }

    fn endpoint_derivative(&self) -> &[f64] {
        &self.k[6]
    }

    fn prepare_dense<F>(&mut self, _f: &mut F, _t: f64, y: &[f64], y_new: &[f64], h: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        for i in 0..y.len() {
            let ydiff = y_new[i] - y[i];
            let bspl = h * self.k[0][i] - ydiff;
            self.cont[0][i] = y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * self.k[6][i] - bspl;
            let mut d = 0.0;
            for (s, ds) in D.iter().enumerate() {
                d += ds * self.k[s][i];
            }
            self.cont[4][i] = h * d;
        }
        Ok(())
    }

    fn dense(&self, theta: f64, out: &mut [f64]) {
        let s = theta;
        let s1 = 1.0 - s;
        let [c0, c1, c2, c3, c4] = &self.cont;
        for i in 0..out.len() {
            out[i] = c0[i] + (c1[i] + (c2[i] + (c3[i] + c4[i] * s1) * s) * s1) * s;
        }
    }

    fn evaluations(&self) -> usize {
        self.evals
    }
}
