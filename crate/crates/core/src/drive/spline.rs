//! Interpolating cubic spline on a uniform grid with not-a-knot end conditions.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UniformCubicSpline {
    t0: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivative at each knot.
    m: Vec<f64>,
}

impl UniformCubicSpline {
    pub fn new(t0: f64, h: f64, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n < 4 {
            return Err(invalid("spline", "need at least four knots"));
        }
        if !(h > 0.0) {
            return Err(invalid("spline", "knot spacing must be positive"));
        }
        let d: Vec<f64> = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    0.0
                } else {
                    (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h)
                }
            })
            .collect();

        let mut m = vec![0.0; n];
        // not-a-knot collapses the first and last interior rows to M_i = d_i
        m[1] = d[1];
        m[n - 2] = d[n - 2];

        // Thomas sweep over rows 2..=n-3 of M_{i-1} + 4 M_i + M_{i+1} = 6 d_i
        if n > 4 {
            let lo = 2;
            let hi = n - 3;
            let len = hi - lo + 1;
            let mut c = vec![0.0; len];
            let mut r = vec![0.0; len];
            for k in 0..len {
                let i = lo + k;
                let mut rhs = 6.0 * d[i];
                if i == lo {
                    rhs -= m[1];
                }
                if i == hi {
                    rhs -= m[n - 2];
                }
                let (prev_c, prev_r) = if k == 0 { (0.0, 0.0) } else { (c[k - 1], r[k - 1]) };
                let denom = 4.0 - prev_c;
                c[k] = 1.0 / denom;
                r[k] = (rhs - prev_r) / denom;
            }
            for k in (0..len).rev() {
                let next = if k + 1 < len { m[lo + k + 1] } else { 0.0 };
                m[lo + k] = r[k] - c[k] * next;
            }
        }
        m[0] = 2.0 * m[1] - m[2];
        m[n - 1] = 2.0 * m[n - 2] - m[n - 3];

        Ok(Self { t0, h, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.y
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.h * (self.y.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let end = self.end();
        let slack = 1e-9 * self.h;
        if !(t >= self.t0 - slack && t <= end + slack) {
            return Err(Error::OutOfRange { t, start: self.t0, end });
        }
        let u = ((t - self.t0) / self.h).max(0.0);
        let i = (u.floor() as usize).min(self.y.len() - 2);
        Ok((i, u - i as f64))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (i, s) = self.locate(t)?;
        // snap onto knots so grid times return stored values bit-exactly
        if s < 1e-12 {
            return Ok(self.y[i]);
        }
        if s > 1.0 - 1e-12 {
            return Ok(self.y[i + 1]);
        }
        let r = 1.0 - s;
        let h2 = self.h * self.h / 6.0;
        Ok(r * self.y[i] + s * self.y[i + 1] + h2 * ((r * r * r - r) * self.m[i] + (s * s * s - s) * self.m[i + 1]))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        let (i, s) = self.locate(t)?;
        Ok(self.piece_derivative(i, s))
    }

    fn piece_derivative(&self, i: usize, s: f64) -> f64 {
        let r = 1.0 - s;
        let h = self.h;
        (self.y[i + 1] - self.y[i]) / h + h / 6.0 * ((1.0 - 3.0 * r * r) * self.m[i] + (3.0 * s * s - 1.0) * self.m[i + 1])
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64> {
        let (i, s) = self.locate(t)?;
        Ok(self.piece_second_derivative(i, s))
    }

    fn piece_second_derivative(&self, i: usize, s: f64) -> f64 {
        (1.0 - s) * self.m[i] + s * self.m[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_not_a_knot_values() {
        let y: Vec<f64> = (0..8)
            .map(|i| {
                let t = i as f64 * 0.5;
                t.cos() * (-0.2 * t).exp()
            })
            .collect();
        let s = UniformCubicSpline::new(0.0, 0.5, y).unwrap();
        let expect = [
            (0.1, 0.9756958350987541),
            (0.77, 0.6153198691102212),
            (1.9, -0.2210325611704257),
            (3.3, -0.5112229673829174),
            (3.5, -0.465030628545797),
        ];
        for (t, e) in expect {
            assert!((s.eval(t).unwrap() - e).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn reproduces_cubic_polynomials() {
        let p = |t: f64| 0.3 - 1.2 * t + 0.7 * t * t - 0.15 * t * t * t;
        let h = 0.25;
        let y: Vec<f64> = (0..21).map(|i| p(i as f64 * h)).collect();
        let s = UniformCubicSpline::new(0.0, h, y).unwrap();
        for i in 0..400 {
            let t = i as f64 * 0.0125;
            assert!((s.eval(t).unwrap() - p(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_at_knots_and_second_derivative_continuous() {
        let y: Vec<f64> = (0..50).map(|i| ((i * 7919) % 97) as f64 / 97.0 - 0.5).collect();
        let h = 0.05;
        let s = UniformCubicSpline::new(1.0, h, y.clone()).unwrap();
        for (k, v) in y.iter().enumerate() {
            assert_eq!(s.eval(1.0 + k as f64 * h).unwrap(), *v);
        }
        // adjacent cubic pieces evaluated at their shared knot
        for k in 1..49 {
            let (dl, dr) = (s.piece_derivative(k - 1, 1.0), s.piece_derivative(k, 0.0));
            assert!((dl - dr).abs() < 1e-8 * dl.abs().max(1.0), "knot {k}: {dl} vs {dr}");
            let (ml, mr) = (s.piece_second_derivative(k - 1, 1.0), s.piece_second_derivative(k, 0.0));
            assert!((ml - mr).abs() < 1e-8 * ml.abs().max(1.0), "knot {k}: {ml} vs {mr}");
        }
        // and the public evaluators agree with the pieces just off the knot
        let t = 1.0 + 10.0 * h;
        let near = s.second_derivative(t + 1e-6 * h).unwrap();
        assert!((near - s.piece_second_derivative(10, 0.0)).abs() < 1e-3 * near.abs().max(1.0));
    }

    #[test]
    fn rejects_out_of_range() {
        let s = UniformCubicSpline::new(0.0, 1.0, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(s.eval(-0.5).is_err());
        assert!(s.eval(3.5).is_err());
        assert!(s.eval(3.0).is_ok());
    }
}
