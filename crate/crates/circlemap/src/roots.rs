//! Root bracketing for strictly increasing functions.
//!
//! Everything in the crate that inverts a lift goes through
//! [`solve_increasing`]: plain bisection to a coarse bracket, then a
//! safeguarded Newton polish when a derivative is available. Bisection
//! alone is retained for nonsmooth kinds.

use crate::error::{Error, Result};

/// Absolute interval tolerance for plain bisection.
pub const BISECT_TOL: f64 = 5e-15;

const MAX_BISECT: usize = 200;
const MAX_NEWTON: usize = 40;

/// Solve f(x) = target on [lo, hi] where f is strictly increasing.
pub fn solve_increasing<F>(f: F, lo: f64, hi: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    solve_increasing_with(f, None::<fn(f64) -> f64>, lo, hi, target)
}

/// Same as [`solve_increasing`] with a Newton polish using df.
pub fn solve_increasing_newton<F, D>(f: F, df: D, lo: f64, hi: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    solve_increasing_with(f, Some(df), lo, hi, target)
}

fn solve_increasing_with<F, D>(f: F, df: Option<D>, lo: f64, hi: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    // Endpoints count as roots within roundoff of the forward map.
    if fa >= target {
        if fa - target <= 1e-12 {
            return Ok(a);
        }
        return Err(Error::BracketFailed { target, lo, hi });
    }
    if fb <= target {
        if target - fb <= 1e-12 {
            return Ok(b);
        }
        return Err(Error::BracketFailed { target, lo, hi });
    }

    // coarse bracket suffices when a Newton polish follows
    let bisect_tol = if df.is_some() { 1e-6 } else { BISECT_TOL };
    for _ in 0..MAX_BISECT {
        if b - a <= bisect_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if f(mid) < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut x = 0.5 * (a + b);

    if let Some(df) = df {
        // Newton from the bisection estimate until the iterate stops moving;
        // fall back to the bracket midpoint on any misbehaving step.
        for _ in 0..MAX_NEWTON {
            let fx = f(x) - target;
            if fx == 0.0 {
                break;
            }
            let d = df(x);
            if d <= 0.0 || !d.is_finite() {
                break;
            }
            let xn = x - fx / d;
            if !xn.is_finite() || xn < lo || xn > hi || xn == x {
                break;
            }
            x = xn;
        }
    }
    Ok(x.clamp(lo, hi))
}
