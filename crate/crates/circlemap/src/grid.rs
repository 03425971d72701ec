//! Uniform-grid functions, monotone knot tables, and small numeric helpers.

use crate::error::{Error, Result};

/// Neumaier compensated sum. Used wherever many small masses are totaled
/// so probability checks hold to 1e-12 even at d^12 terms.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Function sampled on the uniform grid x_i = i/n, i = 0..=n.
#[derive(Debug, Clone)]
pub struct GridFn {
    values: Vec<f64>,
}

impl GridFn {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self { values: vec![value; n + 1] }
    }

    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
        Self { values }
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Piecewise-linear evaluation; x is clamped to [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.intervals();
        let t = (x.clamp(0.0, 1.0)) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Composite trapezoid rule over [0, 1].
    pub fn trapezoid(&self) -> f64 {
        let n = self.intervals() as f64;
        let inner = compensated_sum(self.values[1..self.values.len() - 1].iter().copied());
        (inner + 0.5 * (self.values[0] + self.values[self.values.len() - 1])) / n
    }

    pub fn sup_diff(&self, other: &GridFn) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch(self.intervals(), other.intervals()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Cumulative trapezoid integral as a grid function (value 0 at x = 0).
    pub fn cumulative(&self) -> GridFn {
        let n = self.intervals() as f64;
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) / n;
            out.push(acc);
        }
        GridFn { values: out }
    }
}

/// Strictly increasing knot table (x_i, y_i). Interpolation between knots
/// is monotone piecewise-linear; reported quantities derived from one of
/// these are knot-resolution-limited.
#[derive(Debug, Clone)]
pub struct GridHomeomorphism {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridHomeomorphism {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter("knot vectors must match and have >= 2 points".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        for (i, w) in ys.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn identity(n: usize) -> Self {
        let xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        Self { xs: xs.clone(), ys: xs }
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.ys[0], *self.ys.last().unwrap())
    }

    pub fn max_knot_spacing(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Evaluate at x inside the knot domain (clamped).
    pub fn eval(&self, x: f64) -> f64 {
        interp(&self.xs, &self.ys, x)
    }

    /// Evaluate the inverse at y inside the knot range (clamped).
    pub fn eval_inv(&self, y: f64) -> f64 {
        interp(&self.ys, &self.xs, y)
    }

    /// Evaluate the periodic lift H(x + 1) = H(x) + 1. Requires a [0, 1]
    /// knot domain with H(0) = 0, H(1) = 1.
    pub fn eval_lifted(&self, x: f64) -> f64 {
        let q = x.floor();
        q + self.eval(x - q)
    }

    /// Compose knotwise with another table mapping this range onward.
    pub fn sup_diff_values(&self, other: &GridHomeomorphism) -> Result<f64> {
        if self.xs.len() != other.xs.len() {
            return Err(Error::GridMismatch(self.xs.len(), other.xs.len()));
        }
        Ok(self
            .ys
            .iter()
            .zip(&other.ys)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let mut i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i - 1,
    };
    if i >= n - 1 {
        i = n - 2;
    }
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] * (1.0 - t) + ys[i + 1] * t
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant for sampled lifts.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidParameter("need >= 2 samples".into()));
        }
        for (i, w) in xs.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        for (i, w) in ys.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonMonotone(i + 1));
            }
        }
        let n = xs.len();
        let mut d = vec![0.0; n - 1];
        for i in 0..n - 1 {
            d[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = d[0];
        slopes[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            // harmonic mean keeps the interpolant monotone
            let (a, b) = (d[i - 1], d[i]);
            slopes[i] = if a * b <= 0.0 {
                0.0
            } else {
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        Ok(Self { xs, ys, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0;
        }
        if x >= self.xs[n - 2] {
            return n - 2;
        }
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        (y0 * (6.0 * t2 - 6.0 * t) + m0 * (3.0 * t2 - 4.0 * t + 1.0)
            + y1 * (-6.0 * t2 + 6.0 * t)
            + m1 * (3.0 * t2 - 2.0 * t))
            / h
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}
