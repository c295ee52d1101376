//! Piecewise cubic Hermite interpolation with Fritsch–Carlson slope limiting.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node abscissae must be strictly increasing")]
    NotIncreasing,
    #[error("nodes, values and slopes differ in length")]
    LengthMismatch,
}

/// Hermite cubic through `(xs[i], ys[i])` with slopes `slopes[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteCubic {
    /// Uses the given slopes unchanged.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self, InterpError> {
        if xs.len() != ys.len() || xs.len() != slopes.len() {
            return Err(InterpError::LengthMismatch);
        }
        if xs.len() < 2 {
            return Err(InterpError::TooFewNodes(xs.len()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(InterpError::NotIncreasing);
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Starts from the given slopes and limits them so the interpolant is
    /// monotone on every interval where the data are.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self, InterpError> {
        let mut h = Self::new(xs, ys, slopes)?;
        h.limit_slopes();
        Ok(h)
    }

    /// Classic PCHIP: Fritsch–Carlson slopes computed from the data alone.
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, InterpError> {
        let n = xs.len();
        if n != ys.len() {
            return Err(InterpError::LengthMismatch);
        }
        if n < 2 {
            return Err(InterpError::TooFewNodes(n));
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] > 0.0 {
                0.5 * (secants[i - 1] + secants[i])
            } else {
                0.0
            };
        }
        Self::monotone(xs, ys, slopes)
    }

    fn limit_slopes(&mut self) {
        let n = self.xs.len();
        for i in 0..n - 1 {
            let delta = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
            if delta == 0.0 {
                self.slopes[i] = 0.0;
                self.slopes[i + 1] = 0.0;
                continue;
            }
            if self.slopes[i] * delta < 0.0 {
                self.slopes[i] = 0.0;
            }
            if self.slopes[i + 1] * delta < 0.0 {
                self.slopes[i + 1] = 0.0;
            }
            let a = self.slopes[i] / delta;
            let b = self.slopes[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                self.slopes[i] = tau * a * delta;
                self.slopes[i + 1] = tau * b * delta;
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.xs.len();
        self.xs.partition_point(|&k| k <= x).saturating_sub(1).min(n - 2)
    }

    /// Value and first two derivatives. Outside the node range the end
    /// cubics are extended.
    pub fn eval_with_derivatives(&self, x: f64) -> [f64; 3] {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d1 = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1;
        let d2 = (12.0 * s - 6.0) * y0
            + (6.0 * s - 4.0) * m0
            + (-12.0 * s + 6.0) * y1
            + (6.0 * s - 2.0) * m1;
        [value, d1 / h, d2 / (h * h)]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivatives(x)[0]
    }
}
