//! The rescaled inverse-iterate homeomorphism, its multiplier, the linear
//! model L, the functional equation check, and the reconstruction of L
//! knots from dual-derivative values.

use crate::circle_map::LiftMap;
use crate::dual_deriv::DualDerivativeTable;
use crate::error::{Error, Result};
use crate::grid::GridHomeomorphism;

/// Multiplier delta = lim F^{-n}(1) / F^{-(n+1)}(1), the dual derivative at
/// the all-zero history.
#[derive(Debug, Clone, Copy)]
pub struct DeltaReport {
    pub value: f64,
    /// |delta_n - delta_{n-1}| at the deepest step
    pub gap: f64,
    pub depth: u32,
}

pub fn delta_of(m: &LiftMap, depth: u32) -> Result<DeltaReport> {
    if depth < 2 {
        return Err(Error::InvalidParameter("delta needs depth >= 2".into()));
    }
    let mut pts = Vec::with_capacity(depth as usize + 2);
    let mut y = 1.0f64;
    for _ in 0..=depth {
        y = m.inverse01(y);
        pts.push(y);
    }
    let value = pts[depth as usize - 1] / pts[depth as usize];
    let prev = pts[depth as usize - 2] / pts[depth as usize - 1];
    Ok(DeltaReport { value, gap: (value - prev).abs(), depth })
}

/// theta_n(x) = F^{-n}(x) / F^{-n}(1) sampled on [0, d^K].
/// Also returns the Cauchy certificate ||theta_{j+1} - theta_j||_inf for
/// j up to n (computed on the sample grid).
pub fn theta_n(m: &LiftMap, depth: u32, range_pow: u32, knots_per_unit: usize) -> Result<(GridHomeomorphism, Vec<f64>)> {
    if depth < 1 {
        return Err(Error::InvalidParameter("theta needs depth >= 1".into()));
    }
    if range_pow > depth {
        return Err(Error::InvalidParameter(format!(
            "range d^{range_pow} needs depth >= {range_pow}, got {depth}"
        )));
    }
    let span = (m.degree() as f64).powi(range_pow as i32);
    let count = (knots_per_unit as f64 * span).round() as usize;
    let xs: Vec<f64> = (0..=count).map(|i| span * i as f64 / count as f64).collect();
    let mut iter: Vec<f64> = xs.clone();
    let mut unit = 1.0f64;
    let mut prev: Option<Vec<f64>> = None;
    let mut diffs = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        for v in iter.iter_mut() {
            *v = m.inverse(*v);
        }
        unit = m.inverse01(unit);
        let theta: Vec<f64> = iter.iter().map(|v| v / unit).collect();
        if let Some(p) = &prev {
            let d = theta.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            diffs.push(d);
        }
        prev = Some(theta);
    }
    Ok((GridHomeomorphism::new(xs, prev.unwrap())?, diffs))
}

/// The linear model: multiplier, theta knots, and the orbit knots
/// L^k(0) = theta(k).
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub degree: u32,
    pub delta: DeltaReport,
    pub theta: GridHomeomorphism,
    /// L^k(0) = theta(k) for k = 0 ..= d^K
    pub l_knots: Vec<f64>,
    pub range_pow: u32,
}

impl LinearModel {
    /// L(x) = theta(theta^{-1}(x) + 1), by monotone interpolation on the
    /// theta knots.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (_, hi) = self.theta.domain();
        let t = self.theta.eval_inv(x);
        if t + 1.0 > hi + 1e-12 {
            return Err(Error::InsufficientRange { needed: t + 1.0, have: hi });
        }
        Ok(self.theta.eval(t + 1.0))
    }
}

pub fn linear_model_map(m: &LiftMap, depth: u32, range_pow: u32) -> Result<LinearModel> {
    let (theta, _) = theta_n(m, depth, range_pow, 512)?;
    let delta = delta_of(m, depth)?;
    let top = (m.degree() as u64).pow(range_pow);
    let l_knots = (0..=top).map(|k| theta.eval(k as f64)).collect();
    Ok(LinearModel { degree: m.degree(), delta, theta, l_knots, range_pow })
}

/// sup over test points of |L(x) - delta^{-1} L^(d)(delta x)| on the part
/// of the knot range where the d-fold composition stays inside.
pub fn check_functional_eq(model: &LinearModel) -> Result<f64> {
    let d = model.degree;
    let delta = model.delta.value;
    let (_, hi) = model.theta.domain();
    if hi < d as f64 {
        return Err(Error::InsufficientRange { needed: d as f64, have: hi });
    }
    // largest x with theta^{-1}(delta x) + d still inside the knot domain
    let max_x = 0.95 * model.theta.eval(hi - d as f64) / delta;
    let samples = 101;
    let mut worst = 0.0f64;
    for i in 0..samples {
        let x = max_x * i as f64 / (samples - 1) as f64;
        let mut y = delta * x;
        for _ in 0..d {
            y = model.eval(y)?;
        }
        let lhs = model.eval(x)?;
        worst = worst.max((lhs - y / delta).abs());
    }
    Ok(worst)
}

/// Solve the L knots from a dual-derivative table (degree 2): the interval
/// masses m_k = theta(k+1) - theta(k) obey
/// m_k / m_{k-1} = prod_{i=0..j} D*(pad(u 0 1^i)) / D*(pad(u 1 0^i))
/// where k = u 2^j with u odd, every factor looked up zero-padded at the
/// table depth. Normalization theta(0) = 0, theta(1) = 1.
pub fn reconstruct_from_dual(table: &DualDerivativeTable, range_pow: u32) -> Result<Vec<f64>> {
    if table.degree() != 2 {
        return Err(Error::DegreeTwoOnly(table.degree()));
    }
    let top = 1u64 << range_pow;
    if top > table.values().len() as u64 {
        return Err(Error::InsufficientRange {
            needed: top as f64,
            have: table.values().len() as f64,
        });
    }
    let v = table.values();
    let mut knots = Vec::with_capacity(top as usize + 1);
    knots.push(0.0);
    knots.push(1.0);
    let mut mass = 1.0f64;
    for k in 1..top {
        let j = k.trailing_zeros();
        let u = k >> j;
        let mut ratio = 1.0;
        for i in 0..=j {
            let num = (u << i) - 1; // word u 0 1^i
            let den = u << i; // word u 1 0^i
            ratio *= v[num as usize] / v[den as usize];
        }
        mass *= ratio;
        knots.push(knots[k as usize] + mass);
    }
    Ok(knots)
}
