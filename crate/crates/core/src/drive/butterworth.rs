//! Digital Butterworth low-pass filters from the bilinear transform,
//! realised as a cascade of second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// One section `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = 1.0 + z_inv * self.a[0] + z2 * self.a[1];
        num / den
    }
}

#[derive(Debug, Clone)]
pub struct Butterworth {
    sections: Vec<Biquad>,
}

impl Butterworth {
    /// Low-pass of the given order with cutoff `cutoff` (same units as `sample_rate`).
    pub fn lowpass(order: usize, cutoff: f64, sample_rate: f64) -> Result<Self> {
        if !(1..=8).contains(&order) {
            return Err(invalid("filter_order", "supported orders are 1..=8"));
        }
        if !(cutoff > 0.0 && cutoff < sample_rate / 2.0) {
            return Err(invalid(
                "cutoff",
                format!("cutoff {cutoff} must lie in (0, {})", sample_rate / 2.0),
            ));
        }
        let k = 2.0 * sample_rate;
        let wc = k * (PI * cutoff / sample_rate).tan();
        let n = order as f64;
        let mut sections = Vec::with_capacity(order.div_ceil(2));

        for idx in 0..order / 2 {
            // upper-half-plane pole of the normalised prototype
            let theta = PI * (2.0 * idx as f64 + n + 1.0) / (2.0 * n);
            let sigma = wc * theta.cos();
            let r2 = wc * wc;
            let a0 = k * k - 2.0 * sigma * k + r2;
            sections.push(Biquad {
                b: [r2 / a0, 2.0 * r2 / a0, r2 / a0],
                a: [2.0 * (r2 - k * k) / a0, (k * k + 2.0 * sigma * k + r2) / a0],
            });
        }
        if order % 2 == 1 {
            let a0 = k + wc;
            sections.push(Biquad {
                b: [wc / a0, wc / a0, 0.0],
                a: [(wc - k) / a0, 0.0],
            });
        }
        Ok(Self { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Causal filtering from rest, transposed direct form II per section.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut data = input.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for v in data.iter_mut() {
                let x = *v;
                let y = s.b[0] * x + z1;
                z1 = s.b[1] * x - s.a[0] * y + z2;
                z2 = s.b[2] * x - s.a[1] * y;
                *v = y;
            }
        }
        data
    }

    /// Magnitude response at frequency `f`.
    pub fn gain(&self, f: f64, sample_rate: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / sample_rate);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
            .norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_cascade_output() {
        // reference: 4th-order design at fc = 5, fs = 20 applied to a fixed ramp-plus-sine input
        let f = Butterworth::lowpass(4, 5.0, 20.0).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin() + 0.1 * i as f64).collect();
        let expect = [
            0.0,
            0.06994221189868753,
            0.3911784225510273,
            0.9406170470286916,
            1.2644547482405195,
            1.0034172090254332,
            0.37223568865597007,
            -0.1631825521690346,
            -0.3215451022237925,
            -0.03615896256631684,
            0.6135242930268537,
            1.3934681482491125,
        ];
        for (y, e) in f.filter(&x).iter().zip(expect) {
            assert!((y - e).abs() < 1e-12, "{y} vs {e}");
        }
        let mut a2: Vec<f64> = f.sections().iter().map(|s| s.a[1]).collect();
        a2.sort_by(f64::total_cmp);
        assert!((a2[0] - 3.956612989658006e-2).abs() < 1e-14);
        assert!((a2[1] - 4.464626921716894e-1).abs() < 1e-14);
    }

    #[test]
    fn half_power_at_cutoff() {
        for order in 1..=6 {
            let f = Butterworth::lowpass(order, 5.0, 20.0).unwrap();
            assert!((f.gain(0.0, 20.0) - 1.0).abs() < 1e-12);
            assert!((f.gain(5.0, 20.0) - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_cutoff_at_nyquist() {
        assert!(Butterworth::lowpass(4, 10.0, 20.0).is_err());
        assert!(Butterworth::lowpass(4, 0.0, 20.0).is_err());
        assert!(Butterworth::lowpass(0, 1.0, 20.0).is_err());
    }
}
